// Command-line front end: one subcommand per experiment kind.
//
//   qrc capacity --config sweep.cfg --out results/ --threads 4
//   qrc validate
//
// Exit status: 0 success, 1 usage or configuration error, 2 validation failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qrc/error.hpp"
#include "qrc/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> samples;
  bool dump_signals = false;
  std::string inject_fault;
};

void print_summary(const qrc::ExperimentResult& r) {
  if (r.validation) {
    for (const auto& g : r.validation->groups)
      std::printf("%-30s %s  %s\n", g.name.c_str(), g.passed ? "PASS" : "FAIL", g.detail.c_str());
    return;
  }
  for (const auto& rec : r.records) {
    std::string line;
    for (const auto& [k, v] : rec.cell.params) line += k + "=" + v + " ";
    std::printf("%s\n", line.c_str());
    for (const auto& m : rec.metrics) std::printf("    %-18s %12.5g +- %.3g\n", m.name.c_str(), m.mean, m.stddev);
    if (rec.failures > 0) std::printf("    failures: %d of %zu\n", rec.failures, rec.sample_seeds.size());
  }
}

int run(qrc::ExperimentKind kind, const Flags& f) {
  qrc::ExperimentConfig config =
      f.config.empty() ? qrc::default_config(kind) : qrc::load_config(f.config, kind);
  if (f.seed) config.seed = *f.seed;
  if (f.threads) config.threads = *f.threads;
  if (f.samples) config.samples = *f.samples;
  if (!f.out.empty()) config.output_dir = f.out;
  if (f.dump_signals) config.dump_signals = true;
  config.validate();

  qrc::ValidateOptions vo;
  vo.inject_fault = f.inject_fault;
  const auto result = qrc::run_experiment(config, vo);
  qrc::write_results(result, config.output_dir);
  print_summary(result);
  std::printf("results written to %s (%.1f s)\n", config.output_dir.c_str(), result.wall_seconds);
  if (result.validation && !result.validation->passed()) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum reservoir computing experiments"};
  app.require_subcommand(1);

  Flags flags;
  std::optional<qrc::ExperimentKind> chosen;
  const std::pair<const char*, qrc::ExperimentKind> commands[] = {
      {"capacity", qrc::ExperimentKind::kCapacity}, {"narma", qrc::ExperimentKind::kNarma},
      {"timer", qrc::ExperimentKind::kTimer},       {"mg", qrc::ExperimentKind::kMg},
      {"esn", qrc::ExperimentKind::kEsn},           {"validate", qrc::ExperimentKind::kValidate}};
  const char* help[] = {"STM / PC capacity sweep", "NARMA multitask emulation", "timer task",
                        "Mackey-Glass closed-loop prediction", "echo state network baseline",
                        "run the built-in invariant checks"};
  int i = 0;
  for (const auto& [name, kind] : commands) {
    auto* sub = app.add_subcommand(name, help[i++]);
    sub->add_option("--config", flags.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--samples", flags.samples, "samples per cell")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-signals", flags.dump_signals, "also write signals.csv for the first sample");
    if (kind == qrc::ExperimentKind::kValidate)
      sub->add_option("--inject-fault", flags.inject_fault, "break one check on purpose (trace, unitarity)");
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return run(*chosen, flags);
  } catch (const qrc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
