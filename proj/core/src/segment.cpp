#include <algorithm>
#include <sstream>

#include "capcurate/error.hpp"
#include "capcurate/text_stats.hpp"
#include "lexicon_data.hpp"

namespace capcurate {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at `i`; malformed sequences yield U+FFFD
// and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kReplacement;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return kReplacement;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0x20000 && c <= 0x2FFFF);
}

bool is_digit(char32_t c) { return (c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19); }

bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (c == kReplacement) return false;
  if (c < 0xC0) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, math
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK symbols and punctuation
  if (c >= 0xFE10 && c <= 0xFE6F) return false;  // vertical/compat/small forms
  if (c >= 0xFF00 && c <= 0xFF65) {              // fullwidth forms: keep letters only
    return (c >= 0xFF21 && c <= 0xFF3A) || (c >= 0xFF41 && c <= 0xFF5A);
  }
  if (c >= 0xFE00 && c <= 0xFE0F) return false;  // variation selectors
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

bool is_word(char32_t c) { return is_letter(c) || is_digit(c); }

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;  // Greek
  if (c >= 0x410 && c <= 0x42F) return c + 32;                 // Cyrillic
  if (c >= 0xFF21 && c <= 0xFF3A) return c + 32;               // fullwidth Latin
  return c;
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

std::vector<char32_t> decode_all(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) cps.push_back(decode_utf8(text, i));
  return cps;
}

// Word-run segmentation over [begin, end). When `split_cjk` is set, CJK
// ideographs end a word run and are handed to `on_cjk_run` instead.
template <class CjkFn>
void scan_words(const std::vector<char32_t>& cps, bool split_cjk, std::vector<std::string>& out, CjkFn&& on_cjk_run) {
  const std::size_t n = cps.size();
  std::size_t i = 0;
  auto wordish = [&](char32_t c) { return is_word(c) && !(split_cjk && is_cjk(c)); };
  while (i < n) {
    const char32_t c = cps[i];
    if (split_cjk && is_cjk(c)) {
      std::size_t j = i;
      while (j < n && is_cjk(cps[j])) ++j;
      on_cjk_run(i, j);
      i = j;
      continue;
    }
    if (!wordish(c)) {
      ++i;
      continue;
    }
    std::string token;
    std::size_t j = i;
    while (j < n) {
      const char32_t cur = cps[j];
      if (wordish(cur)) {
        append_utf8(token, to_lower(cur));
        ++j;
        continue;
      }
      const bool has_prev = j > i;
      const bool has_next = j + 1 < n;
      if (has_prev && has_next) {
        const char32_t prev = cps[j - 1];
        const char32_t next = cps[j + 1];
        if (is_apostrophe(cur) && is_letter(prev) && is_letter(next) && !(split_cjk && is_cjk(next))) {
          token.push_back('\'');
          ++j;
          continue;
        }
        if ((cur == '.' || cur == ',') && is_digit(prev) && is_digit(next)) {
          token.push_back(static_cast<char>(cur));
          ++j;
          continue;
        }
      }
      break;
    }
    out.push_back(std::move(token));
    i = j;
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    decode_utf8(s, i);
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(PosTag tag) noexcept {
  switch (tag) {
    case PosTag::NOUN: return "NOUN";
    case PosTag::VERB: return "VERB";
    case PosTag::ADJ: return "ADJ";
    case PosTag::OTHER: return "OTHER";
  }
  return "OTHER";
}

PosTag parse_pos_tag(std::string_view text) {
  if (text == "NOUN") return PosTag::NOUN;
  if (text == "VERB") return PosTag::VERB;
  if (text == "ADJ") return PosTag::ADJ;
  if (text == "OTHER") return PosTag::OTHER;
  throw Error(ErrorCode::invalid_argument, "unknown POS tag '" + std::string(text) + "'");
}

std::vector<std::string> EnglishSegmenter::segment(std::string_view text) const {
  std::vector<std::string> out;
  scan_words(decode_all(text), false, out, [](std::size_t, std::size_t) {});
  return out;
}

namespace {

std::unordered_set<std::string> bundled_cn_words() {
  std::unordered_set<std::string> words;
  std::istringstream lines{std::string(detail::kChineseLexicon)};
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string tag, word;
    if (!(fields >> tag)) continue;
    while (fields >> word) words.insert(word);
  }
  return words;
}

}  // namespace

ChineseSegmenter::ChineseSegmenter() : ChineseSegmenter(bundled_cn_words(), "cn-maxmatch-v1") {}

ChineseSegmenter::ChineseSegmenter(std::unordered_set<std::string> lexicon, std::string id)
    : lexicon_(std::move(lexicon)), id_(std::move(id)) {
  for (const auto& w : lexicon_) max_word_chars_ = std::max(max_word_chars_, utf8_length(w));
}

std::vector<std::string> ChineseSegmenter::segment(std::string_view text) const {
  const auto cps = decode_all(text);
  std::vector<std::string> out;
  scan_words(cps, true, out, [&](std::size_t begin, std::size_t end) {
    std::size_t i = begin;
    while (i < end) {
      const std::size_t longest = std::min(max_word_chars_, end - i);
      std::size_t take = 1;
      for (std::size_t len = longest; len >= 2; --len) {
        std::string candidate;
        for (std::size_t k = i; k < i + len; ++k) append_utf8(candidate, cps[k]);
        if (lexicon_.count(candidate) != 0) {
          take = len;
          break;
        }
      }
      std::string token;
      for (std::size_t k = i; k < i + take; ++k) append_utf8(token, cps[k]);
      out.push_back(std::move(token));
      i += take;
    }
  });
  return out;
}

const Segmenter& default_segmenter(Language lang) {
  static const EnglishSegmenter en;
  static const ChineseSegmenter cn;
  if (lang == Language::EN) return en;
  return cn;
}

std::vector<std::string> segment(std::string_view text, Language lang, const Segmenter* segmenter) {
  return (segmenter != nullptr ? *segmenter : default_segmenter(lang)).segment(text);
}

// ---------------------------------------------------------------------------
// Tagger

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_consonant(char c) { return std::string_view("aeiou").find(c) == std::string_view::npos; }

std::string plural(const std::string& noun) {
  if (ends_with(noun, "s") || ends_with(noun, "x") || ends_with(noun, "z") || ends_with(noun, "ch") ||
      ends_with(noun, "sh")) {
    return noun + "es";
  }
  if (noun.size() >= 2 && noun.back() == 'y' && is_consonant(noun[noun.size() - 2])) {
    return noun.substr(0, noun.size() - 1) + "ies";
  }
  return noun + "s";
}

// Regular third-person, past and gerund forms.
std::vector<std::string> verb_forms(const std::string& v) {
  std::vector<std::string> forms;
  forms.push_back(plural(v));
  const bool short_cvc = v.size() == 3 && is_consonant(v[0]) && !is_consonant(v[1]) && is_consonant(v[2]) &&
                         std::string_view("wxy").find(v[2]) == std::string_view::npos;
  if (v.back() == 'e' && !ends_with(v, "ee")) {
    forms.push_back(v + "d");
    forms.push_back(v.substr(0, v.size() - 1) + "ing");
  } else if (v.size() >= 2 && v.back() == 'y' && is_consonant(v[v.size() - 2])) {
    forms.push_back(v.substr(0, v.size() - 1) + "ied");
    forms.push_back(v + "ing");
  } else if (short_cvc) {
    forms.push_back(v + v.back() + "ed");
    forms.push_back(v + v.back() + "ing");
  } else {
    forms.push_back(v + "ed");
    forms.push_back(v + "ing");
  }
  if (ends_with(v, "ie")) forms.back() = v.substr(0, v.size() - 2) + "ying";
  return forms;
}

std::unordered_map<std::string, PosTag> load_bundled_lexicon() {
  std::unordered_map<std::string, PosTag> lex;
  auto add = [&](const std::string& w, PosTag t) { lex.emplace(w, t); };

  std::unordered_map<std::string, std::pair<std::string, std::string>> irregular;
  {
    std::istringstream lines{std::string(detail::kEnglishIrregularVerbs)};
    std::string base, past, part;
    while (lines >> base >> past >> part) irregular[base] = {past, part};
  }

  // Load order sets precedence: the first tag seen for a word wins.
  for (const PosTag pass : {PosTag::OTHER, PosTag::NOUN, PosTag::ADJ, PosTag::VERB}) {
    for (const std::string_view data : {detail::kEnglishLexicon, detail::kChineseLexicon}) {
      std::istringstream lines{std::string(data)};
      std::string line;
      while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string tag_text, word;
        if (!(fields >> tag_text) || parse_pos_tag(tag_text) != pass) continue;
        const bool english = data.data() == detail::kEnglishLexicon.data();
        while (fields >> word) {
          add(word, pass);
          if (!english) continue;
          if (pass == PosTag::NOUN) add(plural(word), PosTag::NOUN);
          if (pass == PosTag::VERB) {
            if (auto it = irregular.find(word); it != irregular.end()) {
              add(it->second.first, PosTag::VERB);
              add(it->second.second, PosTag::VERB);
              add(plural(word), PosTag::VERB);
              add(verb_forms(word).back(), PosTag::VERB);
            } else {
              for (const auto& f : verb_forms(word)) add(f, PosTag::VERB);
            }
          }
        }
      }
    }
  }
  return lex;
}

}  // namespace

LexiconTagger::LexiconTagger(std::unordered_map<std::string, PosTag> lexicon, std::string id, bool suffix_fallback)
    : lexicon_(std::move(lexicon)), id_(std::move(id)), suffix_fallback_(suffix_fallback) {}

const LexiconTagger& LexiconTagger::bundled() {
  static const LexiconTagger tagger(load_bundled_lexicon(), "lexicon-bundled-v1", true);
  return tagger;
}

PosTag LexiconTagger::tag_one(const std::string& token) const {
  if (auto it = lexicon_.find(token); it != lexicon_.end()) return it->second;
  if (!suffix_fallback_) return PosTag::OTHER;
  if (token.size() < 4 || !std::all_of(token.begin(), token.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    return PosTag::OTHER;
  }
  static constexpr std::pair<std::string_view, PosTag> kSuffixes[] = {
      {"ly", PosTag::OTHER},     {"ing", PosTag::VERB},   {"ed", PosTag::VERB},     {"ous", PosTag::ADJ},
      {"ful", PosTag::ADJ},      {"ive", PosTag::ADJ},    {"able", PosTag::ADJ},    {"ible", PosTag::ADJ},
      {"ish", PosTag::ADJ},      {"less", PosTag::ADJ},   {"ic", PosTag::ADJ},      {"al", PosTag::ADJ},
      {"tion", PosTag::NOUN},    {"sion", PosTag::NOUN},  {"ment", PosTag::NOUN},   {"ness", PosTag::NOUN},
      {"ity", PosTag::NOUN},     {"ism", PosTag::NOUN},   {"ist", PosTag::NOUN},    {"ship", PosTag::NOUN},
      {"hood", PosTag::NOUN},    {"er", PosTag::NOUN},    {"or", PosTag::NOUN},
  };
  for (const auto& [suffix, tag] : kSuffixes) {
    if (ends_with(token, suffix)) return tag;
  }
  return PosTag::OTHER;
}

std::vector<PosTag> LexiconTagger::tag(std::span<const std::string> tokens) const {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(tag_one(t));
  return tags;
}

}  // namespace capcurate
