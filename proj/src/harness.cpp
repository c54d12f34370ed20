#include "adages/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "adages/selector.hpp"

namespace adages {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Machine-stream tags: each machine draws knockoffs from its own stream so a
// trial is reproducible no matter how trials are scheduled across workers.
constexpr std::uint64_t kLevelQStream = 1;
constexpr std::uint64_t kSplitLevelStream = 2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool is_known_method(const std::string& m) {
  return m == "xie_split" || AggregationRule::parse(m).has_value();
}

// One unit of work for the pool, fully determined before any thread starts.
struct TrialTask {
  LinearModelSpec spec;
  int rep = 0;
  std::uint64_t trial_seed = 0;
};

std::vector<TrialRecord> run_tasks(const std::vector<TrialTask>& tasks,
                                   const std::vector<std::string>& methods,
                                   double q, int workers,
                                   int* soft_violations) {
  std::vector<TrialRecord> records(tasks.size());
  if (tasks.empty()) return records;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      records[i] = run_trial(tasks[i].spec, methods, q, tasks[i].rep,
                             tasks[i].trial_seed, soft_violations);
    }
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> soft{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      try {
        int local_soft = 0;
        records[i] = run_trial(tasks[i].spec, methods, q, tasks[i].rep,
                               tasks[i].trial_seed, &local_soft);
        soft.fetch_add(local_soft);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  if (soft_violations != nullptr) *soft_violations += soft.load();
  return records;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

void ExperimentConfig::validate() const {
  if (sweep_variable != "k" && sweep_variable != "d") {
    throw std::invalid_argument("config: sweep_variable must be \"k\" or \"d\"");
  }
  if (sweep_values.empty()) {
    throw std::invalid_argument("config: sweep_values must be nonempty");
  }
  for (int v : sweep_values) {
    if (v < 1) throw std::invalid_argument("config: sweep values must be >= 1");
  }
  if (methods.empty()) {
    throw std::invalid_argument("config: methods must be nonempty");
  }
  for (const std::string& m : methods) {
    if (!is_known_method(m)) {
      throw std::invalid_argument("config: unknown method \"" + m + "\"");
    }
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("config: q must lie in (0, 1)");
  }
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  // The swept field is overwritten per value; check the rest once with the
  // smallest sweep value in place so every trial-level spec is also valid.
  LinearModelSpec probe = base;
  for (int v : sweep_values) {
    if (sweep_variable == "k") {
      probe.k = v;
    } else {
      probe.d = v;
    }
    probe.validate();
  }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  const nlohmann::json& b = j.at("base");
  cfg.base.n = b.at("n").get<int>();
  cfg.base.d = b.at("d").get<int>();
  cfg.base.s = b.at("s").get<int>();
  cfg.base.rho = b.value("rho", 0.25);
  cfg.base.amplitude = b.value("amplitude", 2.0);
  cfg.base.k = b.value("k", 1);
  cfg.sweep_variable = j.value("sweep_variable", std::string("k"));
  cfg.sweep_values = j.at("sweep_values").get<std::vector<int>>();
  cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.q = j.value("q", 0.2);
  cfg.reps = j.value("reps", 100);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.out_dir = j.value("out_dir", std::string());
  cfg.workers = j.value("workers", 1);
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

TrialRecord run_trial(const LinearModelSpec& spec,
                      const std::vector<std::string>& methods, double q,
                      int rep, std::uint64_t trial_seed,
                      int* soft_violations) {
  spec.validate();
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("run_trial: q must lie in (0, 1)");
  }
  for (const std::string& m : methods) {
    if (!is_known_method(m)) {
      throw std::invalid_argument("run_trial: unknown method \"" + m + "\"");
    }
  }

  std::mt19937_64 rng(trial_seed);
  auto [data, truth] = gen_instance(spec, rng);
  const std::vector<DatasetShard> shards = partition(data.X, data.y, spec.k);

  TrialRecord rec;
  rec.k = spec.k;
  rec.d = spec.d;
  rec.n = spec.n;
  rec.s = spec.s;
  rec.rep = rep;
  rec.seed = trial_seed;
  rec.truth = truth;

  auto select_all = [&](double level, std::uint64_t stream,
                        std::vector<bool>& failed) {
    std::vector<SelectionSet> sets;
    sets.reserve(shards.size());
    failed.assign(shards.size(), false);
    for (const DatasetShard& shard : shards) {
      std::mt19937_64 machine_rng(
          mix_seed(trial_seed, stream, static_cast<std::uint64_t>(shard.machine_id)));
      try {
        sets.push_back(machine_select(shard, level, machine_rng));
      } catch (const std::runtime_error&) {
        // Selector failure (e.g. solver non-convergence): the machine reports
        // nothing; the trial is flagged so means never include it.
        failed[static_cast<std::size_t>(shard.machine_id)] = true;
        ++rec.failures;
        sets.emplace_back(spec.d);
      }
    }
    return sets;
  };

  std::vector<bool> machine_failed;
  rec.machine_sets = select_all(q, kLevelQStream, machine_failed);

  const bool want_split =
      std::find(methods.begin(), methods.end(), "xie_split") != methods.end();
  std::vector<SelectionSet> split_sets;
  std::vector<bool> split_failed;
  if (want_split) {
    split_sets = select_all(q / spec.k, kSplitLevelStream, split_failed);
  }

  const bool clean = rec.failures == 0;
  const SelectionSet& support = rec.truth.support;

  rec.machine_fdp.resize(rec.machine_sets.size());
  rec.machine_tpp.resize(rec.machine_sets.size());
  for (std::size_t i = 0; i < rec.machine_sets.size(); ++i) {
    const bool ok = !machine_failed[i];
    rec.machine_fdp[i] = ok ? fdp(rec.machine_sets[i], support) : kNaN;
    rec.machine_tpp[i] = ok ? tpp(rec.machine_sets[i], support) : kNaN;
  }

  const VoteProfile profile = vote_counts(rec.machine_sets, spec.d);
  rec.c_star = adaptive_threshold(profile);
  rec.c_tilde = modified_threshold(profile);
  rec.diff = diff_count(threshold_select(profile, 1),
                        threshold_select(profile, rec.c_star), support);

  rec.rules.reserve(methods.size());
  for (const std::string& m : methods) {
    RuleResult r;
    if (m == "xie_split") {
      r.rule = AggregationRule::union_rule();
      r.label = "xie_split";
      r.from_trial_machines = false;
      r.outcome = aggregate(split_sets, r.rule);
    } else {
      r.rule = *AggregationRule::parse(m);
      r.outcome = aggregate(rec.machine_sets, r.rule);
    }
    r.fdp = clean ? fdp(r.outcome.selected, support) : kNaN;
    r.tpp = clean ? tpp(r.outcome.selected, support) : kNaN;
    rec.rules.push_back(std::move(r));
  }

  if (clean) {
    for (const InequalityViolation& v : check_trial(rec)) {
      if (v.hard) {
        throw TrialInvariantViolation(v.what + " (trial seed " +
                                      std::to_string(trial_seed) + ")");
      }
      if (soft_violations != nullptr) ++*soft_violations;
    }
  }
  return rec;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();

  std::vector<TrialTask> tasks;
  tasks.reserve(config.sweep_values.size() * static_cast<std::size_t>(config.reps));
  for (int value : config.sweep_values) {
    LinearModelSpec spec = config.base;
    if (config.sweep_variable == "k") {
      spec.k = value;
    } else {
      spec.d = value;
    }
    for (int rep = 0; rep < config.reps; ++rep) {
      const std::uint64_t trial_seed =
          mix_seed(config.seed, static_cast<std::uint64_t>(value),
                   static_cast<std::uint64_t>(rep));
      LinearModelSpec task_spec = spec;
      task_spec.seed = trial_seed;
      tasks.push_back({task_spec, rep, trial_seed});
    }
  }

  SweepResult result;
  result.trials = run_tasks(tasks, config.methods, config.q, config.workers,
                            &result.soft_violations);
  result.summaries = summarize(result.trials);

  if (!config.out_dir.empty()) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    std::ostringstream trials;
    write_trials_csv(trials, result.trials);
    write_text_file(dir / "trials.csv", trials.str());
    std::ostringstream summary;
    write_summary_csv(summary, result.summaries);
    write_text_file(dir / "summary.csv", summary.str());
  }
  return result;
}

SweepResult run_appendix_cases(double q, std::vector<std::pair<int, int>> cases,
                               int reps, std::uint64_t seed,
                               const std::string& out_dir, int workers) {
  if (cases.empty()) {
    throw std::invalid_argument("run_appendix_cases: empty case list");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("run_appendix_cases: q must lie in (0, 1)");
  }
  if (reps < 1) throw std::invalid_argument("run_appendix_cases: reps must be >= 1");
  static const std::vector<std::pair<int, int>> allowed = {
      {5, 20}, {5, 80}, {10, 20}, {10, 80}};
  for (const auto& kd : cases) {
    if (std::find(allowed.begin(), allowed.end(), kd) == allowed.end()) {
      throw std::invalid_argument(
          "run_appendix_cases: case (" + std::to_string(kd.first) + ", " +
          std::to_string(kd.second) + ") is not one of the studied shapes");
    }
  }

  const std::vector<std::string> methods = {"union", "intersection", "median",
                                            "adages", "adages_m"};
  std::vector<TrialTask> tasks;
  tasks.reserve(cases.size() * static_cast<std::size_t>(reps));
  for (const auto& [k, d] : cases) {
    LinearModelSpec spec;
    spec.n = 1000;
    spec.d = d;
    spec.s = 10;
    spec.rho = 0.25;
    spec.amplitude = 2.0;
    spec.k = k;
    const std::uint64_t case_tag =
        (static_cast<std::uint64_t>(k) << 32) | static_cast<std::uint64_t>(d);
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t trial_seed =
          mix_seed(seed, case_tag, static_cast<std::uint64_t>(rep));
      LinearModelSpec task_spec = spec;
      task_spec.seed = trial_seed;
      tasks.push_back({task_spec, rep, trial_seed});
    }
  }

  SweepResult result;
  result.trials = run_tasks(tasks, methods, q, workers, &result.soft_violations);
  result.summaries = summarize(result.trials);

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);

    std::ostringstream trials;
    write_trials_csv(trials, result.trials);
    write_text_file(dir / "appendix_trials.csv", trials.str());

    std::ostringstream machines;
    machines << "k,d,rep,seed,machine_id,fdp,power\n";
    for (const TrialRecord& rec : result.trials) {
      for (std::size_t i = 0; i < rec.machine_fdp.size(); ++i) {
        machines << rec.k << ',' << rec.d << ',' << rec.rep << ',' << rec.seed
                 << ',' << i << ',' << fmt_double(rec.machine_fdp[i]) << ','
                 << fmt_double(rec.machine_tpp[i]) << '\n';
      }
    }
    write_text_file(dir / "appendix_machines.csv", machines.str());

    std::ostringstream summary;
    write_summary_csv(summary, result.summaries);
    write_text_file(dir / "appendix_summary.csv", summary.str());
  }
  return result;
}

std::vector<SelectionSet> parse_selections(std::istream& in) {
  std::vector<SelectionSet> sets;
  std::set<long> seen_ids;
  int dimension = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "selections line " + std::to_string(lineno);

    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 =
        tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw std::invalid_argument(where + ": expected machine_id<TAB>d<TAB>indices");
    }
    long machine_id = 0;
    int d = 0;
    try {
      machine_id = std::stol(line.substr(0, tab1));
      d = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
    } catch (const std::exception&) {
      throw std::invalid_argument(where + ": machine_id and d must be integers");
    }
    if (machine_id < 0) {
      throw std::invalid_argument(where + ": machine_id must be nonnegative");
    }
    if (!seen_ids.insert(machine_id).second) {
      throw std::invalid_argument(where + ": duplicate machine_id " +
                                  std::to_string(machine_id));
    }
    if (sets.empty()) {
      dimension = d;
    } else if (d != dimension) {
      throw std::invalid_argument(where + ": dimension mismatch (" +
                                  std::to_string(d) + " vs " +
                                  std::to_string(dimension) + ")");
    }

    std::vector<int> indices;
    const std::string rest = line.substr(tab2 + 1);
    if (!rest.empty()) {
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const std::size_t comma = rest.find(',', pos);
        const std::string token =
            rest.substr(pos, comma == std::string::npos ? std::string::npos
                                                        : comma - pos);
        try {
          indices.push_back(std::stoi(token));
        } catch (const std::exception&) {
          throw std::invalid_argument(where + ": bad index token \"" + token +
                                      "\"");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    try {
      sets.push_back(SelectionSet::from_indices(d, std::move(indices)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
  }
  return sets;
}

std::vector<SelectionSet> parse_selections_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open selections file: " + path);
  return parse_selections(in);
}

void write_selections_file(const std::string& path,
                           const std::vector<SelectionSet>& sets) {
  std::ostringstream out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    out << i << '\t' << sets[i].dimension() << '\t';
    const std::vector<int>& members = sets[i].members();
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j > 0) out << ',';
      out << members[j];
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

AggregationOutcome aggregate_file(const std::string& path,
                                  const AggregationRule& rule) {
  const std::vector<SelectionSet> sets = parse_selections_file(path);
  if (sets.empty()) {
    throw std::invalid_argument("aggregate_file: no selections in " + path);
  }
  return aggregate(sets, rule);
}

void write_trials_csv(std::ostream& out,
                      const std::vector<TrialRecord>& trials) {
  out << "method,k,d,n,s,rep,seed,fdp,power,c_star,c0,agg_size,failures\n";
  for (const TrialRecord& rec : trials) {
    for (const RuleResult& r : rec.rules) {
      out << r.method_name() << ',' << rec.k << ',' << rec.d << ',' << rec.n
          << ',' << rec.s << ',' << rec.rep << ',' << rec.seed << ','
          << fmt_double(r.fdp) << ',' << fmt_double(r.tpp) << ','
          << r.outcome.threshold_used << ',' << r.outcome.c0 << ','
          << r.outcome.selected.size() << ',' << rec.failures << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out,
                       const std::vector<SweepSummary>& rows) {
  out << "method,k,d,mean_fdp,mean_power,reps,c_star_min,c_star_q25,"
         "c_star_med,c_star_q75,c_star_max\n";
  for (const SweepSummary& s : rows) {
    out << s.method << ',' << s.k << ',' << s.d << ',' << fmt_double(s.mean_fdp)
        << ',' << fmt_double(s.mean_power) << ',' << s.reps << ','
        << fmt_double(s.c_star_min) << ',' << fmt_double(s.c_star_q25) << ','
        << fmt_double(s.c_star_med) << ',' << fmt_double(s.c_star_q75) << ','
        << fmt_double(s.c_star_max) << '\n';
  }
}

}  // namespace adages
