#pragma once

#include <string_view>

namespace capcurate::detail {

// Each line: "<TAG> word word ...". NOUN and VERB lines list base forms;
// regular inflections are derived when the lexicon is loaded.
extern const std::string_view kEnglishLexicon;
// Each line: "base past past_participle".
extern const std::string_view kEnglishIrregularVerbs;
// Each line: "<TAG> 词 词 ...".
extern const std::string_view kChineseLexicon;

}  // namespace capcurate::detail
