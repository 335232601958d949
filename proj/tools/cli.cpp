#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cameo/domain.hpp"
#include "cameo/errors.hpp"
#include "cameo/executor.hpp"
#include "cameo/plan.hpp"
#include "cameo/provenance.hpp"
#include "cameo/registry.hpp"
#include "cameo/shipped.hpp"
#include "cameo/workflow.hpp"

namespace cameo::cli {

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

void write_demo_data(const fs::path& dir, std::uint64_t seed, std::size_t days) {
  fs::create_directories(dir);
  const auto sites = domain::demo_sites();
  write_file_atomic(dir / "sites.csv", domain::write_sites_csv(sites));
  write_file_atomic(dir / "batteries.json", domain::demo_battery_catalog().dump(2) + "\n");
  std::vector<domain::HistoricalRecord> records;
  for (const auto& s : sites) records.push_back(domain::generate_synthetic_history(s, seed, days));
  write_file_atomic(dir / "history.csv", domain::write_history_csv(records));
}

namespace {

struct Failure {
  int code;
};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

void apply_overrides(WorkflowSpec& spec, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
    spec.params[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
  }
}

fs::path data_dir_for(const fs::path& workflow, const std::string& data_dir) {
  if (!data_dir.empty()) return fs::absolute(data_dir);
  return fs::absolute(workflow).parent_path();
}

void print_findings(const ValidationReport& report, std::ostream& os) {
  for (const auto& f : report.findings) os << to_string(f) << "\n";
}

struct Prepared {
  WorkflowSpec spec;
  ProcessGraph graph;
  SweepPlan plan;
};

Prepared prepare(WorkflowSpec spec, const fs::path& data_dir, std::ostream& err) {
  const auto report = validate_workflow(spec, builtin_registry());
  if (!report.ok()) {
    print_findings(report, err);
    throw Failure{1};
  }
  Prepared p;
  p.graph = build_dag(spec);
  p.plan = plan_tasks(spec, p.graph, resolve_sources(spec, data_dir));
  p.spec = std::move(spec);
  return p;
}

void print_counts(const SweepPlan& plan, std::ostream& out) {
  for (const auto& [process, n] : plan.counts) out << process << ": " << n << "\n";
  out << "total: " << plan.total() << "\n";
}

int execute(const Prepared& p, const RunOptions& options, std::ostream& out, std::ostream& err) {
  interrupt_flag().store(false);
  RunResult r;
  try {
    r = run_workflow(p.spec, p.plan, builtin_registry(), options);
  } catch (const RunAborted& e) {
    err << "aborted: " << e.what() << "\n";
    return 1;
  }
  out << "run: " << r.run_dir.string() << "\n";
  out << "tasks: " << p.plan.total() << " total, " << r.executed << " executed, " << r.succeeded << " succeeded, "
      << r.cached << " cached, " << r.failed << " failed, " << r.skipped << " skipped\n";
  out << "peak running: " << r.peak_running << " (max " << options.max_parallel << ")\n";
  out << "trace: " << r.trace_file.string() << "\n";
  out << "report: " << (r.run_dir / "report" / "report.html").string() << "\n";
  for (const auto& f : r.published) out << "published: " << f.string() << "\n";
  for (const auto& e : r.errors) err << "failed: " << e << "\n";
  return r.ok() ? 0 : 1;
}

struct RunFlags {
  std::size_t max_parallel = 1;
  bool resume = false;
  std::string workdir;
  std::uint64_t seed = 42;
  std::size_t abort_after = 0;
  bool no_resources = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--max-parallel,-j", f.max_parallel, "Maximum number of tasks running at once")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--resume", f.resume, "Serve tasks with a successful cache entry from the cache");
  cmd->add_option("--workdir", f.workdir, "Work directory (default: $CAMEO_WORKDIR or ./cameo-work)");
  cmd->add_option("--seed", f.seed, "Seed for synthetic data, scenario sampling and retry jitter")->capture_default_str();
  cmd->add_option("--abort-after", f.abort_after, "Stop after this many successful tasks (testing aid)");
  cmd->add_flag("--no-resources", f.no_resources, "Do not sample CPU and memory");
}

RunOptions run_options(const RunFlags& f, const fs::path& data_dir) {
  RunOptions o;
  o.max_parallel = f.max_parallel;
  o.resume = f.resume;
  o.workdir = f.workdir.empty() ? default_workdir() : fs::absolute(f.workdir);
  o.data_dir = data_dir;
  o.seed = f.seed;
  o.abort_after_successes = f.abort_after;
  o.interrupt = &interrupt_flag();
  o.measure_resources = !f.no_resources;
  return o;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parameter-sweep workflow engine with the battery-sizing use case", "cameo"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string workflow, data_dir, run_dir, formulation, synth_dir;
  std::vector<std::string> sets;
  RunFlags flags;
  std::size_t days = 365;
  std::uint64_t synth_seed = 42;

  auto* validate = app.add_subcommand("validate", "Check a workflow against the operation contracts");
  validate->add_option("workflow", workflow, "Workflow file")->required();

  auto* plan = app.add_subcommand("plan", "Print per-process task counts without executing");
  plan->add_option("workflow", workflow, "Workflow file")->required();
  plan->add_option("--data-dir", data_dir, "Directory of source files (default: the workflow's directory)");
  plan->add_option("--set", sets, "Override a workflow param, key=value");

  auto* run = app.add_subcommand("run", "Execute a workflow");
  run->add_option("workflow", workflow, "Workflow file")->required();
  run->add_option("--data-dir", data_dir, "Directory of source files (default: the workflow's directory)");
  run->add_option("--set", sets, "Override a workflow param, key=value");
  add_run_flags(run, flags);

  auto* report = app.add_subcommand("report", "Write the provenance report of a run");
  report->add_option("rundir", run_dir, "Run directory containing trace.tsv")->required();

  auto* demo = app.add_subcommand("demo", "Generate synthetic data and run a shipped pipeline end to end");
  demo->add_option("formulation", formulation, "a or b")->required()->check(CLI::IsMember({"a", "b"}));
  demo->add_option("--days", days, "Days of synthetic history per site")->capture_default_str();
  demo->add_option("--set", sets, "Override a workflow param, key=value");
  add_run_flags(demo, flags);

  auto* synth = app.add_subcommand("synth", "Write the synthetic demo data files");
  synth->add_option("dir", synth_dir, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_option("--days", days, "Days of history per site")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*validate) {
      const auto spec = load_workflow(workflow);
      const auto r = validate_workflow(spec, builtin_registry());
      print_findings(r, out);
      out << r.error_count() << " error(s), " << r.warning_count() << " warning(s)\n";
      return r.ok() ? 0 : 1;
    }
    if (*plan) {
      auto spec = load_workflow(workflow);
      apply_overrides(spec, sets);
      print_counts(prepare(std::move(spec), data_dir_for(workflow, data_dir), err).plan, out);
      return 0;
    }
    if (*run) {
      auto spec = load_workflow(workflow);
      apply_overrides(spec, sets);
      if (run->count("--seed")) spec.params["seed"] = flags.seed;
      const fs::path dd = data_dir_for(workflow, data_dir);
      return execute(prepare(std::move(spec), dd, err), run_options(flags, dd), out, err);
    }
    if (*report) {
      const auto files = render_provenance_report(run_dir);
      out << "stats: " << files.csv.string() << "\nreport: " << files.html.string() << "\n";
      return 0;
    }
    if (*demo) {
      const auto f = formulation == "a" ? Formulation::A : Formulation::B;
      RunOptions options = run_options(flags, {});
      if (!demo->count("--max-parallel"))
        options.max_parallel = std::max(1u, std::thread::hardware_concurrency());
      const fs::path dd = options.workdir / "data";
      options.data_dir = dd;
      write_demo_data(dd, flags.seed, days);
      const fs::path wf = dd / (formulation == "a" ? "formulation_a.workflow.json" : "formulation_b.workflow.json");
      write_file_atomic(wf, std::string(shipped_pipeline(f)));
      auto spec = parse_workflow(shipped_pipeline(f));
      spec.params["seed"] = flags.seed;
      apply_overrides(spec, sets);
      const auto p = prepare(std::move(spec), dd, err);
      out << "data: " << dd.string() << "\n";
      print_counts(p.plan, out);
      return execute(p, options, out, err);
    }
    if (*synth) {
      write_demo_data(synth_dir, synth_seed, days);
      out << "wrote sites.csv, batteries.json and history.csv to " << synth_dir << "\n";
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cameo::cli
