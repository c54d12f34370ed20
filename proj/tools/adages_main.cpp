// Command-line front end: Monte-Carlo sweeps, appendix studies, offline
// aggregation of selections files, the TCP coordinator, and client verbs.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adages/harness.hpp"
#include "adages/service/client.hpp"
#include "adages/service/coordinator.hpp"
#include "adages/service/server.hpp"

namespace {

using adages::AggregationRule;
using nlohmann::json;

std::vector<std::pair<int, int>> parse_cases(const std::string& text) {
  if (text == "all") return {{5, 20}, {5, 80}, {10, 20}, {10, 80}};
  std::vector<std::pair<int, int>> cases;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::size_t x = token.find('x');
    if (x == std::string::npos) {
      throw CLI::ValidationError("--cases",
                                 "expected all or a list like 5x20,10x80");
    }
    try {
      cases.emplace_back(std::stoi(token.substr(0, x)),
                         std::stoi(token.substr(x + 1)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--cases", "bad case token \"" + token + "\"");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cases;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(std::stoi(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_sweep_outcome(const adages::SweepResult& result,
                         const std::string& out_dir,
                         const std::string& trials_name,
                         const std::string& summary_name) {
  adages::write_summary_csv(std::cout, result.summaries);
  std::cout << "wrote " << out_dir << "/" << trials_name << " and "
            << out_dir << "/" << summary_name << " (" << result.trials.size()
            << " trials)\n";
  if (result.soft_violations > 0) {
    std::cerr << "note: " << result.soft_violations
              << " monitored bound check(s) fired; see docs for what the "
                 "soft checks assume\n";
  }
}

json result_to_json(const adages::service::ResultMessage& msg) {
  return json{{"session_id", msg.session_id},
              {"rule", msg.rule},
              {"threshold_used", msg.threshold_used},
              {"c0", msg.c0},
              {"d", msg.d},
              {"selected", msg.selected},
              {"machine_sizes", msg.machine_sizes}};
}

int serve_forever(const std::string& bind_addr) {
  // Block the shutdown signals before any thread exists so sigwait is the
  // only consumer.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  adages::service::Coordinator coordinator;
  adages::service::Server server(coordinator, bind_addr);
  server.start();
  std::cout << "listening on " << server.address() << std::endl;

  int sig = 0;
  sigwait(&set, &sig);
  std::cout << "shutting down" << std::endl;
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed feature-selection aggregation toolkit"};
  app.require_subcommand(1);

  // --- run -------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "Run a configured Monte-Carlo sweep");
  std::string run_config;
  std::string run_out;
  std::uint64_t run_seed = 0;
  int run_reps = 0;
  int run_workers = 0;
  run_cmd->add_option("--config", run_config, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_out, "output directory for CSVs")->required();
  run_cmd->add_option("--seed", run_seed, "override the config seed");
  run_cmd->add_option("--reps", run_reps, "override the config repetitions");
  run_cmd->add_option("--workers", run_workers, "override the worker count");

  // --- appendix ---------------------------------------------------------
  auto* appendix_cmd =
      app.add_subcommand("appendix", "Run the machine-wise appendix studies");
  double appendix_q = 0.2;
  std::string appendix_cases = "all";
  std::string appendix_out;
  int appendix_reps = 100;
  std::uint64_t appendix_seed = 1;
  int appendix_workers = 1;
  appendix_cmd->add_option("--q", appendix_q, "target FDR level");
  appendix_cmd->add_option("--cases", appendix_cases,
                           "all or a list like 5x20,10x80");
  appendix_cmd->add_option("--out", appendix_out, "output directory")->required();
  appendix_cmd->add_option("--reps", appendix_reps, "repetitions per case");
  appendix_cmd->add_option("--seed", appendix_seed, "base seed");
  appendix_cmd->add_option("--workers", appendix_workers, "worker count");

  // --- aggregate-file -----------------------------------------------------
  auto* aggfile_cmd = app.add_subcommand(
      "aggregate-file", "Aggregate a selections file offline");
  std::string aggfile_rule = "adages";
  std::string aggfile_in;
  aggfile_cmd->add_option("--rule", aggfile_rule,
                          "union|intersection|median|fixed:<c>|adages|adages_m");
  aggfile_cmd->add_option("--in", aggfile_in, "selections file (TSV)")
      ->required()
      ->check(CLI::ExistingFile);

  // --- serve -------------------------------------------------------------
  auto* serve_cmd = app.add_subcommand("serve", "Run the aggregation coordinator");
  const char* env_bind = std::getenv("ADAGES_BIND");
  std::string serve_bind = env_bind != nullptr ? env_bind : "127.0.0.1:7464";
  serve_cmd->add_option("--bind", serve_bind,
                        "host:port (default from ADAGES_BIND when set)");

  // --- client verbs --------------------------------------------------------
  auto* open_cmd = app.add_subcommand("open", "Open an aggregation session");
  std::string open_addr;
  int open_k = 0;
  int open_d = 0;
  std::string open_rule = "adages";
  long open_timeout_ms = 0;
  open_cmd->add_option("--addr", open_addr, "coordinator host:port")->required();
  open_cmd->add_option("--expected-k", open_k, "number of machines")->required();
  open_cmd->add_option("--d", open_d, "feature dimension")->required();
  open_cmd->add_option("--rule", open_rule, "aggregation rule");
  open_cmd->add_option("--timeout-ms", open_timeout_ms,
                       "session timeout override");

  auto* report_cmd = app.add_subcommand("report", "Submit one machine's selection");
  std::string report_addr;
  std::string report_session;
  int report_machine = -1;
  int report_d = 0;
  std::string report_selected;
  report_cmd->add_option("--addr", report_addr, "coordinator host:port")->required();
  report_cmd->add_option("--session", report_session, "session token")->required();
  report_cmd->add_option("--machine-id", report_machine, "machine id")->required();
  report_cmd->add_option("--d", report_d, "feature dimension")->required();
  report_cmd->add_option("--selected", report_selected,
                         "comma-separated indices (empty for none)");

  auto* poll_cmd = app.add_subcommand("poll", "Fetch a session's result");
  std::string poll_addr;
  std::string poll_session;
  poll_cmd->add_option("--addr", poll_addr, "coordinator host:port")->required();
  poll_cmd->add_option("--session", poll_session, "session token")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      adages::ExperimentConfig config =
          adages::ExperimentConfig::from_json_file(run_config);
      config.out_dir = run_out;
      if (run_cmd->count("--seed") > 0) config.seed = run_seed;
      if (run_cmd->count("--reps") > 0) config.reps = run_reps;
      if (run_cmd->count("--workers") > 0) config.workers = run_workers;
      adages::SweepResult result = adages::run_sweep(config);
      print_sweep_outcome(result, config.out_dir, "trials.csv", "summary.csv");
      return 0;
    }
    if (*appendix_cmd) {
      adages::SweepResult result = adages::run_appendix_cases(
          appendix_q, parse_cases(appendix_cases), appendix_reps, appendix_seed,
          appendix_out, appendix_workers);
      print_sweep_outcome(result, appendix_out, "appendix_trials.csv",
                          "appendix_summary.csv");
      return 0;
    }
    if (*aggfile_cmd) {
      auto rule = AggregationRule::parse(aggfile_rule);
      if (!rule) {
        std::cerr << "unknown rule \"" << aggfile_rule << "\"\n";
        return 1;
      }
      adages::AggregationOutcome outcome =
          adages::aggregate_file(aggfile_in, *rule);
      json out{{"rule", rule->name()},
               {"threshold_used", outcome.threshold_used},
               {"c0", outcome.c0},
               {"selected", outcome.selected.members()}};
      if (outcome.lambda_bar) out["lambda_bar"] = *outcome.lambda_bar;
      if (outcome.kappa_bar) out["kappa_bar"] = *outcome.kappa_bar;
      std::cout << out.dump() << "\n";
      return 0;
    }
    if (*serve_cmd) {
      return serve_forever(serve_bind);
    }
    if (*open_cmd) {
      adages::service::Client client(open_addr);
      std::optional<long> ttl;
      if (open_cmd->count("--timeout-ms") > 0) ttl = open_timeout_ms;
      const std::string sid = client.open(open_k, open_d, open_rule, ttl);
      std::cout << json{{"session_id", sid}}.dump() << "\n";
      return 0;
    }
    if (*report_cmd) {
      adages::service::Client client(report_addr);
      adages::service::SubmitOutcome out = client.report(
          report_session, report_machine, report_d,
          parse_index_list(report_selected));
      if (out.completed) {
        std::cout << result_to_json(*out.result).dump() << "\n";
      } else {
        std::cout << json{{"status", "ack"},
                          {"received", out.received},
                          {"expected_k", out.expected_k}}
                         .dump()
                  << "\n";
      }
      return 0;
    }
    if (*poll_cmd) {
      adages::service::Client client(poll_addr);
      adages::service::PollOutcome out = client.poll(poll_session);
      if (out.ready) {
        std::cout << result_to_json(*out.result).dump() << "\n";
      } else {
        std::cout << json{{"status", "pending"},
                          {"received", out.received},
                          {"expected_k", out.expected_k}}
                         .dump()
                  << "\n";
      }
      return 0;
    }
  } catch (const adages::service::ServiceError& e) {
    std::cerr << json{{"error", adages::service::to_string(e.code())},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
