#include "capcurate/mixture.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>
#include <set>
#include <sys/wait.h>
#include <unistd.h>

#include "capcurate/checksum.hpp"
#include "capcurate/text_stats.hpp"

namespace capcurate {

namespace fs = std::filesystem;

const std::vector<std::string>& known_group_names() {
  static const std::vector<std::string> names = {"closed_form_vqa", "open_ended_vqa", "document_vqa",
                                                 "math_reasoning", "pure_text"};
  return names;
}

Json DataGroup::to_json() const {
  return Json{{"name", name}, {"datasets", datasets}, {"weight", weight}, {"repeat_factor", repeat_factor}};
}

DataGroup DataGroup::from_json(const Json& obj) {
  DataGroup g;
  try {
    g.name = obj.at("name").get<std::string>();
    if (obj.contains("datasets")) g.datasets = obj.at("datasets").get<std::vector<std::string>>();
    g.weight = obj.at("weight").get<double>();
    if (obj.contains("repeat_factor")) g.repeat_factor = obj.at("repeat_factor").get<int>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse, std::string("data group: ") + e.what());
  }
  return g;
}

void MixtureSpec::validate() const {
  if (groups.empty()) throw Error(ErrorCode::invalid_argument, "mixture has no groups");
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (g.name.empty()) throw Error(ErrorCode::invalid_argument, "group name must be non-empty");
    if (!names.insert(g.name).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate group name '" + g.name + "'");
    }
    if (!(g.weight > 0.0) || !std::isfinite(g.weight)) {
      throw Error(ErrorCode::invalid_argument, "group '" + g.name + "': weight must be > 0");
    }
    if (g.repeat_factor < 1) {
      throw Error(ErrorCode::invalid_argument, "group '" + g.name + "': repeat_factor must be >= 1");
    }
  }
}

double MixtureSpec::weight_sum() const {
  double s = 0.0;
  for (const auto& g : groups) s += g.weight;
  return s;
}

const DataGroup* MixtureSpec::find(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

bool MixtureSpec::contains_dataset(const std::string& dataset_id) const {
  for (const auto& g : groups) {
    if (std::find(g.datasets.begin(), g.datasets.end(), dataset_id) != g.datasets.end()) return true;
  }
  return false;
}

std::vector<GroupAllocation> MixtureSpec::allocate(std::optional<std::uint64_t> budget) const {
  validate();
  const std::uint64_t total = budget.value_or(total_budget);
  long double wsum = 0;
  for (const auto& g : groups) wsum += g.weight;
  std::vector<GroupAllocation> out(groups.size());
  std::vector<std::pair<long double, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const long double exact = static_cast<long double>(total) * groups[i].weight / wsum;
    const auto base = static_cast<std::uint64_t>(std::floor(exact));
    out[i].name = groups[i].name;
    out[i].samples = base;
    assigned += base;
    remainders.emplace_back(exact - static_cast<long double>(base), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[remainders[r % remainders.size()].second].samples;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto rf = static_cast<std::uint64_t>(groups[i].repeat_factor);
    out[i].unique_samples = (out[i].samples + rf - 1) / rf;
  }
  return out;
}

MixtureSpec MixtureSpec::halved(std::size_t group_index) const {
  if (group_index >= groups.size()) throw Error(ErrorCode::invalid_argument, "group index out of range");
  const double unit = static_cast<double>(total_budget) / weight_sum();
  MixtureSpec out = *this;
  out.groups[group_index].weight /= 2.0;
  out.total_budget = static_cast<std::uint64_t>(std::llround(unit * out.weight_sum()));
  return out;
}

std::string MixtureSpec::hash() const { return checksum_bytes(to_json().dump()); }

Json MixtureSpec::to_json() const {
  Json gs = Json::array();
  for (const auto& g : groups) gs.push_back(g.to_json());
  return Json{{"groups", gs}, {"total_budget", total_budget}};
}

MixtureSpec MixtureSpec::from_json(const Json& obj) {
  MixtureSpec m;
  if (!obj.is_object() || !obj.contains("groups") || !obj["groups"].is_array()) {
    throw Error(ErrorCode::parse, "mixture spec needs a 'groups' array");
  }
  for (const auto& g : obj["groups"]) m.groups.push_back(DataGroup::from_json(g));
  try {
    m.total_budget = obj.at("total_budget").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse, std::string("mixture spec: total_budget: ") + e.what());
  }
  m.validate();
  return m;
}

MixtureSpec MixtureSpec::load(const fs::path& path) {
  try {
    return from_json(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

double CommandOracle::evaluate(const MixtureSpec& mixture, std::uint64_t budget) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path input = fs::temp_directory_path() / ("capcurate-oracle-" + std::to_string(::getpid()) + "-" +
                                                      std::to_string(counter++) + ".json");
  atomic_write_file(input, Json{{"mixture", mixture.to_json()}, {"budget", budget}}.dump());
  const std::string cmd = "( " + command_ + " ) < '" + input.string() + "'";
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    fs::remove(input);
    throw Error(ErrorCode::transport, "cannot start oracle command: " + command_);
  }
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  std::error_code ec;
  fs::remove(input, ec);
  if (status != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw Error(ErrorCode::transport, "oracle command exited with status " + std::to_string(code));
  }
  const auto first = out.find_first_not_of(" \t\r\n");
  const auto last = out.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw Error(ErrorCode::transport, "oracle command printed nothing");
  const std::string text = out.substr(first, last - first + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::transport, "oracle command printed a non-numeric score: " + text);
  }
}

Json QuickEvalEntry::to_json() const { return Json{{"mixture_hash", mixture_hash}, {"k", k}, {"score", score}}; }

QuickEvalEntry QuickEvalEntry::from_json(const Json& obj, std::size_t line) {
  QuickEvalEntry e;
  e.mixture_hash = field::required_string(obj, "mixture_hash", line);
  e.k = static_cast<std::uint64_t>(field::required_int(obj, "k", line));
  e.score = field::required_number(obj, "score", line);
  return e;
}

QuickEvalLedger::QuickEvalLedger(fs::path path) : path_(std::move(path)) {
  if (fs::exists(*path_)) {
    JsonlReader reader(*path_);
    while (auto obj = reader.next()) entries_.push_back(QuickEvalEntry::from_json(*obj, reader.line_number()));
  }
}

void QuickEvalLedger::record(const QuickEvalEntry& entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(entry);
  if (path_) {
    JsonlWriter w(*path_, JsonlWriter::Mode::append);
    w.write(entry.to_json());
    w.flush();
  }
}

std::vector<QuickEvalEntry> QuickEvalLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::optional<double> QuickEvalLedger::lookup(const std::string& mixture_hash, std::uint64_t k) const {
  std::lock_guard lock(mu_);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->mixture_hash == mixture_hash && it->k == k) return it->score;
  }
  return std::nullopt;
}

namespace {

double evaluate_recorded(const MixtureSpec& mixture, std::uint64_t k, EvalOracle& oracle, QuickEvalLedger* ledger) {
  const double score = oracle.evaluate(mixture, k);
  if (ledger != nullptr) ledger->record(QuickEvalEntry{mixture.hash(), k, score});
  return score;
}

}  // namespace

double quick_quality_eval(const MixtureSpec& collection, std::uint64_t k, EvalOracle& oracle,
                          QuickEvalLedger* ledger) {
  collection.validate();
  if (k == 0) throw Error(ErrorCode::invalid_argument, "quick evaluation subset size must be >= 1");
  if (k > collection.total_budget) {
    throw Error(ErrorCode::invalid_argument, "subset size " + std::to_string(k) + " exceeds collection budget " +
                                                 std::to_string(collection.total_budget));
  }
  return evaluate_recorded(collection, k, oracle, ledger);
}

// ---------------------------------------------------------------------------
// Stratified subset

std::function<std::string(const CaptionSample&)> strata_key_by_name(const std::string& name) {
  if (name == "source_dataset") return [](const CaptionSample& s) { return s.source_dataset; };
  if (name == "language") return [](const CaptionSample& s) { return std::string(to_string(s.language)); };
  throw Error(ErrorCode::invalid_argument, "unknown strata key '" + name + "' (source_dataset, language)");
}

std::map<std::string, std::uint64_t> stratum_quotas(const std::map<std::string, std::uint64_t>& sizes,
                                                     std::uint64_t k) {
  std::uint64_t total = 0;
  for (const auto& [_, n] : sizes) total += n;
  if (k > total) {
    throw Error(ErrorCode::invalid_argument,
                "subset size " + std::to_string(k) + " exceeds dataset size " + std::to_string(total));
  }
  std::map<std::string, std::uint64_t> quota;
  std::vector<std::string> open;
  for (const auto& [key, n] : sizes) {
    if (n > 0) open.push_back(key);
  }
  std::uint64_t remaining = k;
  // Take whole any stratum no larger than the current equal share.
  for (bool capped = true; capped && !open.empty();) {
    capped = false;
    const std::uint64_t share = remaining / open.size();
    std::vector<std::string> still;
    for (const auto& key : open) {
      if (sizes.at(key) <= share) {
        quota[key] = sizes.at(key);
        remaining -= sizes.at(key);
        capped = true;
      } else {
        still.push_back(key);
      }
    }
    open = std::move(still);
  }
  if (!open.empty()) {
    const std::uint64_t share = remaining / open.size();
    std::uint64_t extra = remaining % open.size();
    for (const auto& key : open) {
      quota[key] = share + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
    }
  }
  for (const auto& [key, _] : sizes) quota.try_emplace(key, 0);
  return quota;
}

DatasetManifest stratified_subset(const DatasetManifest& manifest, const fs::path& root,
                                  const StratifiedSubsetOptions& options, const fs::path& out_dir) {
  if (manifest.kind != ShardKind::samples) {
    throw Error(ErrorCode::invalid_argument, "stratified subsets need a samples dataset");
  }
  if (!options.strata_key) throw Error(ErrorCode::invalid_argument, "no strata key");
  if (options.k == 0) throw Error(ErrorCode::invalid_argument, "subset size must be >= 1");
  if (options.k > manifest.total_samples) {
    throw Error(ErrorCode::invalid_argument, "subset size " + std::to_string(options.k) + " exceeds dataset size " +
                                                 std::to_string(manifest.total_samples));
  }
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    throw Error(ErrorCode::conflict, "output directory is not empty: " + out_dir.string());
  }

  std::map<std::string, std::uint64_t> sizes;
  for (const auto& shard : manifest.shards) {
    for (const auto& s : ShardReader(root / shard.path)) ++sizes[options.strata_key(s)];
  }
  const auto quota = stratum_quotas(sizes, options.k);

  using Entry = std::pair<std::uint64_t, std::string>;
  std::map<std::string, std::priority_queue<Entry>> heaps;
  for (const auto& shard : manifest.shards) {
    for (const auto& s : ShardReader(root / shard.path)) {
      const auto key = options.strata_key(s);
      const std::uint64_t q = quota.at(key);
      if (q == 0) continue;
      auto& heap = heaps[key];
      Entry e{subset_key(s.sample_id, options.seed), s.sample_id};
      if (heap.size() < q) {
        heap.push(std::move(e));
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(std::move(e));
      }
    }
  }
  std::set<std::string> chosen;
  for (auto& [_, heap] : heaps) {
    for (; !heap.empty(); heap.pop()) chosen.insert(heap.top().second);
  }

  fs::create_directories(out_dir);
  for (const auto& shard : manifest.shards) {
    std::vector<CaptionSample> picked;
    for (auto&& s : ShardReader(root / shard.path)) {
      if (chosen.count(s.sample_id) != 0) picked.push_back(std::move(s));
    }
    if (!picked.empty()) write_shard(picked, out_dir / (shard.shard_id + ".jsonl"));
  }
  auto out = build_manifest(out_dir, ShardKind::samples, nullptr, manifest.created_at);
  save_manifest(out, out_dir);
  return out;
}

// ---------------------------------------------------------------------------
// Composition search

Json CompositionTrial::to_json() const {
  return Json{{"pass", pass},   {"group", group},           {"weight_before", weight_before},
              {"weight_after", weight_after}, {"score", score}, {"best_score", best_score},
              {"retained", retained}};
}

Json CompositionResult::to_json() const {
  Json t = Json::array();
  for (const auto& x : trail) t.push_back(x.to_json());
  return Json{{"mixture", mixture.to_json()}, {"baseline_score", baseline_score}, {"final_score", final_score},
              {"passes", passes},             {"trial_calls", trial_calls},       {"trail", t}};
}

CompositionResult composition_search(const MixtureSpec& initial, EvalOracle& oracle, std::uint64_t k,
                                     int max_passes, QuickEvalLedger* ledger) {
  initial.validate();
  if (max_passes < 1) throw Error(ErrorCode::invalid_argument, "max_passes must be >= 1");
  if (k == 0 || k > initial.total_budget) {
    throw Error(ErrorCode::invalid_argument, "subset size must lie in [1, total_budget]");
  }
  CompositionResult result;
  result.mixture = initial;
  try {
    result.baseline_score = evaluate_recorded(initial, k, oracle, ledger);
  } catch (const std::exception& e) {
    throw SearchAborted(std::string("oracle failed on the baseline mixture: ") + e.what(), result);
  }
  double best = result.baseline_score;
  for (int pass = 1; pass <= max_passes; ++pass) {
    result.passes = pass;
    bool changed = false;
    for (std::size_t i = 0; i < result.mixture.groups.size(); ++i) {
      const MixtureSpec trial = result.mixture.halved(i);
      CompositionTrial t{pass, trial.groups[i].name, result.mixture.groups[i].weight, trial.groups[i].weight};
      try {
        t.score = evaluate_recorded(trial, k, oracle, ledger);
      } catch (const std::exception& e) {
        result.final_score = best;
        throw SearchAborted("oracle failed on pass " + std::to_string(pass) + ", group '" + t.group +
                                "': " + e.what(),
                            result);
      }
      ++result.trial_calls;
      if (t.score > best) {
        best = t.score;
        result.mixture = trial;
        t.retained = true;
        changed = true;
      }
      t.best_score = best;
      result.trail.push_back(std::move(t));
    }
    if (!changed) break;
  }
  result.final_score = best;
  return result;
}

// ---------------------------------------------------------------------------
// Incremental evaluation

std::string_view to_string(IncrementalDecision d) noexcept {
  switch (d) {
    case IncrementalDecision::accept_improves: return "accept_improves";
    case IncrementalDecision::accept_maintains: return "accept_maintains";
    case IncrementalDecision::reject: return "reject";
  }
  return "reject";
}

Json IncrementalResult::to_json() const {
  return Json{{"decision", to_string(decision)}, {"score_without", score_without}, {"score_with", score_with},
              {"epsilon", epsilon},              {"mixture_with", mixture_with.to_json()}};
}

IncrementalDecision decide_increment(double score_without, double score_with, double epsilon) {
  if (score_with > score_without + epsilon) return IncrementalDecision::accept_improves;
  if (score_with < score_without - epsilon) return IncrementalDecision::reject;
  return IncrementalDecision::accept_maintains;
}

MixtureSpec with_dataset(const MixtureSpec& base, const NewDataset& dataset) {
  base.validate();
  if (dataset.dataset_id.empty()) throw Error(ErrorCode::invalid_argument, "new dataset id must be non-empty");
  if (base.contains_dataset(dataset.dataset_id)) {
    throw Error(ErrorCode::conflict, "dataset '" + dataset.dataset_id + "' is already in the mixture");
  }
  if (!(dataset.weight > 0.0)) throw Error(ErrorCode::invalid_argument, "new dataset weight must be > 0");
  const double unit = static_cast<double>(base.total_budget) / base.weight_sum();
  MixtureSpec out = base;
  auto it = std::find_if(out.groups.begin(), out.groups.end(),
                         [&](const DataGroup& g) { return g.name == dataset.group; });
  if (it == out.groups.end()) {
    out.groups.push_back(DataGroup{dataset.group, {dataset.dataset_id}, dataset.weight, dataset.repeat_factor});
  } else {
    it->datasets.push_back(dataset.dataset_id);
    it->weight += dataset.weight;
  }
  out.total_budget = static_cast<std::uint64_t>(std::llround(unit * out.weight_sum()));
  out.validate();
  return out;
}

IncrementalResult incremental_eval(const MixtureSpec& base, const NewDataset& dataset, EvalOracle& oracle,
                                   std::uint64_t k, double epsilon, QuickEvalLedger* ledger) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be >= 0");
  IncrementalResult r;
  r.mixture_with = with_dataset(base, dataset);
  r.epsilon = epsilon;
  r.score_without = quick_quality_eval(base, k, oracle, ledger);
  r.score_with = quick_quality_eval(r.mixture_with, k, oracle, ledger);
  r.decision = decide_increment(r.score_without, r.score_with, epsilon);
  return r;
}

// ---------------------------------------------------------------------------
// Curriculum

Json CurriculumStage::to_json() const {
  return Json{{"name", name}, {"mixture", mixture.to_json()}, {"quality", quality.to_json()}, {"budget", budget}};
}

CurriculumStage CurriculumStage::from_json(const Json& obj) {
  CurriculumStage s;
  try {
    s.name = obj.at("name").get<std::string>();
    s.mixture = MixtureSpec::from_json(obj.at("mixture"));
    s.quality = QualityDimensions::from_json(obj.at("quality"));
    s.budget = obj.contains("budget") ? obj.at("budget").get<std::uint64_t>() : s.mixture.total_budget;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse, std::string("curriculum stage: ") + e.what());
  }
  return s;
}

Json CurriculumPlan::to_json() const {
  Json j = Json::array();
  for (const auto& s : stages) j.push_back(s.to_json());
  return Json{{"stages", j}};
}

CurriculumPlan curriculum_plan(std::vector<CurriculumStage> stages) {
  if (stages.empty()) throw Error(ErrorCode::invalid_argument, "curriculum needs at least one stage");
  std::set<std::string> names;
  for (const auto& s : stages) {
    if (s.name.empty()) throw Error(ErrorCode::invalid_argument, "stage name must be non-empty");
    if (!names.insert(s.name).second) throw Error(ErrorCode::invalid_argument, "duplicate stage '" + s.name + "'");
    if (s.budget == 0) throw Error(ErrorCode::invalid_argument, "stage '" + s.name + "' has no budget");
    s.mixture.validate();
    s.quality.validate();
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    const auto& a = stages[i - 1];
    const auto& b = stages[i];
    if (b.quality.complexity < a.quality.complexity) {
      throw Error(ErrorCode::invalid_argument, "complexity decreases from stage '" + a.name + "' (" +
                                                   std::to_string(a.quality.complexity) + ") to stage '" + b.name +
                                                   "' (" + std::to_string(b.quality.complexity) + ")");
    }
  }
  return CurriculumPlan{std::move(stages)};
}

// ---------------------------------------------------------------------------
// Rank consistency

namespace {

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "spearman: length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::invalid_argument, "spearman needs at least two points");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Json RankConsistencyReport::to_json() const {
  Json ps = Json::array();
  for (const auto& p : pairs) ps.push_back(Json{{"size_a", p.size_a}, {"size_b", p.size_b}, {"rho", p.rho}});
  return Json{{"datasets", datasets}, {"sizes", sizes}, {"pairs", ps}, {"min_rho", min_rho}};
}

ScoreGrid score_grid_from_json(const Json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::parse, "score grid must be an object of dataset -> {size: score}");
  ScoreGrid grid;
  for (const auto& [dataset, row] : obj.items()) {
    if (!row.is_object()) throw Error(ErrorCode::parse, "score grid row '" + dataset + "' must be an object");
    for (const auto& [size, score] : row.items()) {
      try {
        std::size_t used = 0;
        const auto n = std::stoull(size, &used);
        if (used != size.size()) throw std::invalid_argument(size);
        grid[dataset][n] = score.get<double>();
      } catch (const std::exception&) {
        throw Error(ErrorCode::parse, "score grid '" + dataset + "': bad entry for size '" + size + "'");
      }
    }
  }
  return grid;
}

RankConsistencyReport rank_consistency(const ScoreGrid& scores) {
  if (scores.size() < 2) throw Error(ErrorCode::invalid_argument, "rank consistency needs at least 2 datasets");
  std::set<std::uint64_t> sizes;
  for (const auto& [_, row] : scores) {
    for (const auto& [size, _s] : row) sizes.insert(size);
  }
  if (sizes.size() < 2) throw Error(ErrorCode::invalid_argument, "rank consistency needs at least 2 data sizes");
  std::string holes;
  for (const auto& [dataset, row] : scores) {
    for (auto size : sizes) {
      if (row.count(size) == 0) holes += (holes.empty() ? "" : ", ") + dataset + "@" + std::to_string(size);
    }
  }
  if (!holes.empty()) throw Error(ErrorCode::invalid_argument, "incomplete score grid, missing: " + holes);

  RankConsistencyReport report;
  report.sizes.assign(sizes.begin(), sizes.end());
  for (const auto& [dataset, _] : scores) report.datasets.push_back(dataset);
  auto column = [&](std::uint64_t size) {
    std::vector<double> col;
    for (const auto& [_, row] : scores) col.push_back(row.at(size));
    return col;
  };
  report.min_rho = 1.0;
  for (std::size_t a = 0; a < report.sizes.size(); ++a) {
    for (std::size_t b = a + 1; b < report.sizes.size(); ++b) {
      const double rho = spearman(column(report.sizes[a]), column(report.sizes[b]));
      report.pairs.push_back(RankPair{report.sizes[a], report.sizes[b], rho});
      report.min_rho = std::min(report.min_rho, rho);
    }
  }
  return report;
}

}  // namespace capcurate
