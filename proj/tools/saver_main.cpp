#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "saver/audit.hpp"
#include "saver/dataset.hpp"
#include "saver/injection.hpp"
#include "saver/json_io.hpp"
#include "saver/pipeline.hpp"
#include "saver/report.hpp"

namespace fs = std::filesystem;
using saver::Json;

namespace {

saver::RunConfig make_config(const std::string& config_path) {
  saver::RunConfig config;
  if (!config_path.empty()) config = saver::load_config_file(config_path, config);
  return config;
}

int cmd_run(const std::string& dataset_path, const std::string& config_path,
            const std::string& mode_name, const std::string& backend_name, std::uint64_t seed,
            int parallel, const std::string& out_dir, const std::string& fixtures_path,
            bool dump_selection, const std::string& model) {
  saver::RunConfig config = make_config(config_path);
  if (seed != 0) config.seed = seed;
  if (parallel > 0) config.parallelism = parallel;

  auto mode = saver::run_mode_from_string(mode_name);
  if (!mode) {
    std::cerr << "unknown mode: " << mode_name << " (expected saver|vanilla|cot)\n";
    return 2;
  }

  std::unique_ptr<saver::TextBackend> backend;
  if (backend_name == "mock") {
    saver::ScriptedFixture fixture;
    if (!fixtures_path.empty()) {
      fixture = saver::load_fixture_file(fixtures_path, saver::FixturePolicy::Error);
    } else {
      fixture.fallback = saver::FixturePolicy::Echo;
    }
    backend = std::make_unique<saver::MockBackend>(std::move(fixture));
  } else if (backend_name == "http") {
    saver::HttpBackendOptions options = saver::http_options_from_env();
    if (!model.empty()) options.model = model;
    backend = std::make_unique<saver::HttpBackend>(options);
  } else {
    std::cerr << "unknown backend: " << backend_name << " (expected mock|http)\n";
    return 2;
  }

  saver::Dataset dataset = saver::load_dataset(dataset_path);
  saver::PipelineOptions options;
  options.mode = *mode;
  options.dump_selection = dump_selection;
  saver::RunResult result = saver::run_pipeline(dataset, config, options, *backend);
  saver::write_run_outputs(result, out_dir);

  std::cout << "tasks: " << result.outcomes.size() << "  failed: " << result.n_failed << '\n';
  if (result.n_scored > 0) {
    std::cout << "em: " << result.em << "  f1: " << result.f1 << '\n';
  }
  if (result.faithfulness) {
    std::cout << "avg_viol: " << result.faithfulness->avg_viol
              << "  vfr: " << result.faithfulness->vfr << "  usr: " << result.faithfulness->usr
              << "  post_res: " << result.faithfulness->post_res << '\n';
  }
  std::cout << "outputs written to " << out_dir << '\n';
  return result.ok() ? 0 : 1;
}

int cmd_audit(const std::string& trajectory_path, const std::string& task_path,
              const std::string& config_path) {
  saver::RunConfig config = make_config(config_path);
  saver::Trajectory trajectory =
      saver::trajectory_from_json(Json::parse(saver::read_text_file(trajectory_path)));
  saver::Task task;
  saver::AuditOptions options = saver::AuditOptions::from_config(config);
  if (!task_path.empty()) {
    task = saver::task_from_json(Json::parse(saver::read_text_file(task_path)));
  } else {
    options.check_evidence_resolution = false;  // no contexts to resolve against
  }
  auto instances = saver::audit(trajectory, task, options);
  Json out = Json::array();
  for (const auto& inst : instances) out.push_back(saver::instance_to_json(inst));
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_inject(const std::string& spec_path, int n, std::uint64_t seed,
               const std::string& out_path) {
  std::vector<saver::InjectionSpec> specs = saver::default_injection_specs();
  if (!spec_path.empty()) {
    specs.clear();
    Json j = Json::parse(saver::read_text_file(spec_path));
    for (const auto& spec_json : j.at("specs")) {
      saver::InjectionSpec spec;
      spec.name = spec_json.at("name").get<std::string>();
      spec.base_length = spec_json.value("base_length", 5);
      for (const auto& point : spec_json.at("injected")) {
        spec.injected.push_back(
            {saver::violation_type_from_string(point.at("type").get<std::string>()),
             point.value("step", 0)});
      }
      specs.push_back(std::move(spec));
    }
  }
  saver::Rng rng(seed);
  auto corpus = saver::build_injection_corpus(specs, n, rng);

  std::ostringstream out;
  for (const auto& item : corpus) {
    Json expected = Json::array();
    for (const auto& point : item.expected) {
      expected.push_back(
          {{"type", std::string(saver::to_string(point.type))}, {"step", point.step}});
    }
    Json line{{"spec", item.spec_name},
              {"clean", item.clean},
              {"task", saver::task_to_json(item.task)},
              {"trajectory", saver::trajectory_to_json(item.trajectory)},
              {"expected", expected}};
    out << line.dump() << '\n';
  }
  saver::write_text_file(out_path, out.str());
  std::cout << "wrote " << corpus.size() << " cases to " << out_path << '\n';
  return 0;
}

int cmd_report(const std::string& run_dir) {
  saver::recompute_reports(run_dir);
  std::cout << saver::read_text_file((fs::path(run_dir) / "report.csv").string());
  return 0;
}

int cmd_plot(const std::string& run_dir, const std::string& out_path) {
  auto points = saver::usr_curve_from_audit_log((fs::path(run_dir) / "audit_log.jsonl").string());
  saver::write_text_file(out_path, saver::render_usr_curve_svg(points));
  std::cout << "wrote " << out_path << " (" << points.size() << " rounds)\n";
  return 0;
}

int cmd_fixture(const std::string& dataset_path, const std::string& config_path,
                const std::string& mode_name, const std::string& out_path, std::uint64_t seed) {
  saver::RunConfig config = make_config(config_path);
  if (seed != 0) config.seed = seed;
  auto mode = saver::run_mode_from_string(mode_name);
  if (!mode) {
    std::cerr << "unknown mode: " << mode_name << '\n';
    return 2;
  }
  saver::Dataset dataset = saver::load_dataset(dataset_path);
  saver::ScriptedFixture fixture = saver::synthesize_fixture(dataset, config, *mode);
  saver::save_fixture_file(out_path, fixture);
  std::cout << "wrote " << fixture.responses.size() << " fixture entries to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAVeR: self-audited verified reasoning over belief trajectories"};
  app.require_subcommand(1);

  // run
  std::string dataset_path;
  std::string config_path;
  std::string mode_name = "saver";
  std::string backend_name = "mock";
  std::uint64_t seed = 0;
  int parallel = 0;
  std::string out_dir = "runs/out";
  std::string fixtures_path;
  std::string model;
  bool dump_selection = false;
  auto* run = app.add_subcommand("run", "Run the closed loop over a dataset");
  run->add_option("--dataset", dataset_path, "dataset JSONL path")->required();
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--mode", mode_name, "saver|vanilla|cot");
  run->add_option("--backend", backend_name, "mock|http");
  run->add_option("--seed", seed, "run seed");
  run->add_option("--parallel", parallel, "task worker count");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--fixtures", fixtures_path, "mock fixture JSONL (default: echo fallback)");
  run->add_option("--model", model, "http backend model name");
  run->add_flag("--dump-selection", dump_selection, "embed kernels and subset weights in records");

  // audit
  std::string trajectory_path;
  std::string task_path;
  std::string audit_config_path;
  auto* audit_cmd = app.add_subcommand("audit", "Audit a trajectory JSON file");
  audit_cmd->add_option("--trajectory", trajectory_path, "trajectory JSON path")->required();
  audit_cmd->add_option("--task", task_path, "task JSON path (enables evidence checks)");
  audit_cmd->add_option("--config", audit_config_path, "key=value config file");

  // inject
  std::string spec_path;
  int inject_n = 50;
  std::uint64_t inject_seed = 7;
  std::string inject_out = "corpus.jsonl";
  auto* inject_cmd = app.add_subcommand("inject", "Generate a violation-injection corpus");
  inject_cmd->add_option("--spec", spec_path, "injection spec JSON (default: built-in specs)");
  inject_cmd->add_option("--n", inject_n, "number of injected cases (plus 1:1 clean controls)");
  inject_cmd->add_option("--seed", inject_seed, "corpus seed");
  inject_cmd->add_option("--out", inject_out, "output JSONL path");

  // report
  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Recompute reports from a run directory");
  report_cmd->add_option("--run", report_dir, "run directory")->required();

  // plot
  std::string plot_dir;
  std::string plot_out = "usr_curve.svg";
  auto* plot_cmd = app.add_subcommand("plot", "Render the USR-vs-round curve to SVG");
  plot_cmd->add_option("--run", plot_dir, "run directory")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path");

  // fixture
  std::string fx_dataset;
  std::string fx_config;
  std::string fx_mode = "saver";
  std::string fx_out = "fixture.jsonl";
  std::uint64_t fx_seed = 0;
  auto* fixture_cmd =
      app.add_subcommand("fixture", "Synthesize a mock fixture covering a dataset");
  fixture_cmd->add_option("--dataset", fx_dataset, "dataset JSONL path")->required();
  fixture_cmd->add_option("--config", fx_config, "key=value config file");
  fixture_cmd->add_option("--mode", fx_mode, "saver|vanilla|cot");
  fixture_cmd->add_option("--out", fx_out, "output fixture JSONL path");
  fixture_cmd->add_option("--seed", fx_seed, "must match the run seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(dataset_path, config_path, mode_name, backend_name, seed, parallel, out_dir,
                     fixtures_path, dump_selection, model);
    }
    if (audit_cmd->parsed()) return cmd_audit(trajectory_path, task_path, audit_config_path);
    if (inject_cmd->parsed()) return cmd_inject(spec_path, inject_n, inject_seed, inject_out);
    if (report_cmd->parsed()) return cmd_report(report_dir);
    if (plot_cmd->parsed()) return cmd_plot(plot_dir, plot_out);
    if (fixture_cmd->parsed()) return cmd_fixture(fx_dataset, fx_config, fx_mode, fx_out, fx_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
