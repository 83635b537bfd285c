// Command-line front end: training, graph text, conversations, benchmarks,
// perturbations and the HTTP service.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gamtalk/app/config.hpp"
#include "gamtalk/app/datasets.hpp"
#include "gamtalk/app/operations.hpp"
#include "gamtalk/app/service.hpp"
#include "gamtalk/app/store.hpp"
#include "gamtalk/error.hpp"
#include "gamtalk/eval/benchmark.hpp"
#include "gamtalk/file_util.hpp"
#include "gamtalk/gam/model_io.hpp"
#include "gamtalk/gam/trainer.hpp"

namespace fs = std::filesystem;
using namespace gamtalk;

namespace {

constexpr int kExitError = 1;
constexpr int kExitSelfCheck = 3;
constexpr int kExitTransport = 4;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string transport = "live";
  std::string cassette;
  std::string script;
  std::string record;
  std::string store;
  std::string model_name;
  std::string endpoint;
  bool cache = false;
};

struct ModelOptions {
  std::string ref;
  // Context for model files that have no metadata next to them.
  std::string context_dataset;
};

app::AppConfig load_app_config(const GlobalOptions& g) {
  app::AppConfig c = g.config_path.empty() ? app::AppConfig{} : app::load_config(g.config_path);
  if (!g.store.empty()) c.store_root = g.store;
  if (!g.model_name.empty()) c.model_name = g.model_name;
  if (!g.endpoint.empty()) c.endpoint_url = g.endpoint;
  if (g.cache) c.response_cache = true;
  c.validate();
  return c;
}

app::TransportOptions transport_options(const GlobalOptions& g) {
  app::TransportOptions t;
  t.kind = app::transport_kind_from_string(g.transport);
  if (!g.cassette.empty()) t.cassette = g.cassette;
  if (!g.script.empty()) t.script = g.script;
  if (!g.record.empty()) t.record = g.record;
  return t;
}

// A model file path, or the id of a model in the store.
app::ModelEntry resolve_model(const ModelOptions& m, const app::StorePaths& paths) {
  if (fs::is_regular_file(m.ref)) {
    app::ModelEntry entry;
    entry.model = gam::load_model(m.ref);
    const fs::path path(m.ref);
    entry.id = path.stem().string();
    entry.source = "file";
    const auto meta = path.parent_path() / "meta.json";
    if (!m.context_dataset.empty()) {
      entry.context = app::bundled_context(m.context_dataset);
    } else if (path.filename() == "model.json" && fs::exists(meta)) {
      const auto j = nlohmann::json::parse(read_file(meta));
      entry.context = {j.at("context").at("description").get<std::string>(),
                       j.at("context").at("target_semantics").get<std::string>()};
    } else {
      entry.context = {"No description of the dataset is available.",
                       entry.model.target_description};
    }
    return entry;
  }
  auto entry = app::ModelStore(paths).get(m.ref);
  if (!m.context_dataset.empty()) entry.context = app::bundled_context(m.context_dataset);
  return entry;
}

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("-m,--model", m.ref, "Model file or store id")->required();
  cmd->add_option("--context", m.context_dataset,
                  "Use the description of this bundled dataset");
}

std::unique_ptr<llm::ChatClient> make_client(const app::AppConfig& config,
                                             const GlobalOptions& g,
                                             const app::StorePaths& paths) {
  return std::make_unique<llm::ChatClient>(app::make_transport(config, transport_options(g), paths),
                                           app::chat_params(config),
                                           app::make_cache(config, paths));
}

void print_feature_table(const gam::GamModel& model) {
  for (std::size_t i = 0; i < model.terms.size(); ++i) {
    const auto& t = model.terms[i];
    std::cout << "  " << t.feature_name << " (" << gam::to_string(t.kind) << ", "
              << t.bin_count() << " bins, importance " << model.importances[i] << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Fit additive models, render their graphs as text and talk about them "
               "with a language model."};
  cli.require_subcommand(1);
  cli.fallthrough();

  GlobalOptions g;
  cli.add_option("--config", g.config_path, "JSON config file");
  cli.add_option("--seed", g.seed, "Seed for training and sampling");
  cli.add_option("--transport", g.transport, "live, replay or scripted")
      ->check(CLI::IsMember({"live", "replay", "scripted"}));
  cli.add_option("--cassette", g.cassette,
                 "Cassette to replay (replay) or record into (live)");
  cli.add_option("--script", g.script,
                 "Scripted replies: oracle, adversarial, or a JSON array file");
  cli.add_option("--record", g.record, "Also record every exchange to this cassette");
  cli.add_option("--store", g.store, "Store root directory");
  cli.add_option("--model-name", g.model_name, "Chat model name");
  cli.add_option("--endpoint", g.endpoint, "Chat completions URL");
  cli.add_flag("--cache", g.cache, "Reuse cached replies to identical conversation requests");

  // train
  auto* train = cli.add_subcommand("train", "Fit a model and save it");
  std::string dataset, csv, target, csv_path, id, out, description_file, semantics;
  std::size_t rows = 2000;
  int bags = 8, max_bins = 64, rounds = 2000;
  double lr = 0.1;
  train->add_option("--dataset", dataset, "Bundled dataset name");
  train->add_option("--csv", csv, "Train on an arbitrary CSV file (with --target)");
  train->add_option("--target", target, "Target column of --csv");
  train->add_option("--description-file", description_file,
                    "Dataset description for --csv models");
  train->add_option("--target-semantics", semantics, "Meaning of the y-axis for --csv models");
  train->add_option("--csv-path", csv_path, "CSV for datasets that are not shipped");
  train->add_option("--rows", rows, "Rows of synthetic_additive");
  train->add_option("--id", id, "Store id (default: derived from the model)");
  train->add_option("--out", out, "Write the model file here instead of the store");
  train->add_option("--bags", bags, "Outer bags");
  train->add_option("--max-bins", max_bins, "Histogram bins per feature");
  train->add_option("--rounds", rounds, "Maximum boosting rounds");
  train->add_option("--learning-rate", lr, "Learning rate");

  // render
  auto* render = cli.add_subcommand("render", "Print a graph in its text form");
  ModelOptions render_model;
  std::string render_feature;
  std::size_t budget = 0;
  int decimals = 3;
  bool no_ci = false;
  add_model_options(render, render_model);
  render->add_option("-f,--feature", render_feature, "Feature (default: all)");
  render->add_option("--budget", budget, "Token budget; larger graphs are simplified");
  render->add_option("--decimals", decimals, "Decimals of numbers");
  render->add_flag("--no-ci", no_ci, "Omit the confidence bounds");

  // describe
  auto* describe = cli.add_subcommand("describe", "Three-turn description of one graph");
  ModelOptions describe_model;
  std::string describe_feature;
  add_model_options(describe, describe_model);
  describe->add_option("-f,--feature", describe_feature, "Feature")->required();

  // summarize-model
  auto* summarize = cli.add_subcommand("summarize-model",
                                       "Describe every graph, then summarize the model");
  ModelOptions summarize_model_opts;
  add_model_options(summarize, summarize_model_opts);

  // eval
  auto* evalc = cli.add_subcommand("eval", "Run the baseline benchmark");
  std::string eval_model, eval_context, suite, report_path;
  std::vector<std::string> tasks;
  int samples = 0, eval_decimals = 3, concurrency = 0;
  bool print_json = false;
  evalc->add_option("-m,--model", eval_model, "Model file or store id");
  evalc->add_option("--context", eval_context, "Use the description of this bundled dataset");
  evalc->add_option("--suite", suite, "Graph suite instead of one model: bundled")
      ->check(CLI::IsMember({"bundled"}));
  evalc->add_option("--tasks", tasks, "read_value, monotonicity, largest_jump")
      ->delimiter(',');
  evalc->add_option("--samples", samples, "Read-value points per graph");
  evalc->add_option("--decimals", eval_decimals, "Decimals of the graphs shown");
  evalc->add_option("--concurrency", concurrency, "Parallel cases (live transport)");
  evalc->add_option("--report", report_path, "Also write the JSON report here");
  evalc->add_flag("--json", print_json, "Print the JSON report instead of the table");

  // perturb
  auto* perturb = cli.add_subcommand("perturb", "Invert a graph or swap two categories");
  ModelOptions perturb_model;
  std::string perturb_feature, perturb_as, perturb_out;
  bool invert = false;
  std::vector<std::string> swap;
  add_model_options(perturb, perturb_model);
  perturb->add_option("-f,--feature", perturb_feature, "Feature (invert: default all)");
  perturb->add_flag("--invert-y", invert, "Negate the graph");
  perturb->add_option("--swap", swap, "Swap two categories")->expected(2);
  perturb->add_option("--as", perturb_as, "Save as a new store id");
  perturb->add_option("--out", perturb_out, "Write to this file");

  // serve
  auto* serve = cli.add_subcommand("serve", "Start the HTTP service");
  std::string host;
  int port = -1;
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Port (0 picks a free one)");

  // chat
  auto* chat = cli.add_subcommand("chat", "Interactive session on stdin");
  ModelOptions chat_model;
  std::string chat_feature;
  add_model_options(chat, chat_model);
  chat->add_option("-f,--feature", chat_feature, "Graph to start with");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e);
  }

  try {
    const auto config = load_app_config(g);
    const app::StorePaths paths{config.store_root};

    if (train->parsed()) {
      if (dataset.empty() == csv.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "train needs either --dataset or --csv");
      }
      gam::FitConfig fit;
      fit.random_seed = g.seed;
      fit.outer_bags = bags;
      fit.max_bins = max_bins;
      fit.boosting_rounds = rounds;
      fit.learning_rate = lr;
      fit.validate();
      app::ModelEntry entry;
      if (!dataset.empty()) {
        app::DatasetOptions data;
        data.seed = g.seed;
        data.rows = rows;
        if (!csv_path.empty()) data.csv_path = csv_path;
        entry = app::train_dataset_model(
            dataset, data, fit, id.empty() ? std::nullopt : std::optional(id));
      } else {
        if (target.empty()) throw Error(ErrorCode::kInvalidArgument, "--csv needs --target");
        const auto table = app::infer_table(app::read_csv(csv), target);
        entry.model = gam::fit_gam(table, fit);
        entry.id = id.empty() ? app::content_model_id(entry.model) : id;
        entry.source = fs::path(csv).filename().string();
        entry.context.description = description_file.empty()
                                        ? "No description of the dataset is available."
                                        : read_file(description_file);
        entry.context.target_semantics =
            semantics.empty() ? entry.model.target_description : semantics;
      }
      if (!out.empty()) {
        gam::save_model(entry.model, out);
        std::cout << "wrote " << out << "\n";
      } else {
        app::ModelStore(paths).create(entry);
        std::cout << "stored model " << entry.id << " in " << paths.models().string() << "\n";
      }
      print_feature_table(entry.model);
      return 0;
    }

    if (render->parsed()) {
      const auto entry = resolve_model(render_model, paths);
      text::RenderOptions opts;
      opts.decimals = decimals;
      opts.include_ci = !no_ci;
      opts.validate();
      const std::optional<std::size_t> b =
          budget > 0 ? std::optional<std::size_t>(budget) : std::nullopt;
      bool first = true;
      for (const auto& term : entry.model.terms) {
        if (!render_feature.empty() && term.feature_name != render_feature) continue;
        if (!first) std::cout << "\n";
        first = false;
        const auto served = app::serve_graph(term, b, opts);
        std::cout << served.text.text << "\n";
        if (served.simplified) {
          std::cerr << term.feature_name << ": simplified with " << served.merges
                    << " merges to " << served.tokens << " tokens (largest merged gap "
                    << served.max_merge_gap << ")\n";
        }
      }
      if (first) {
        throw Error(ErrorCode::kNotFound, "model has no feature '" + render_feature + "'");
      }
      return 0;
    }

    if (describe->parsed()) {
      const auto entry = resolve_model(describe_model, paths);
      auto client = make_client(config, g, paths);
      const auto d = app::describe_graph(entry, describe_feature, *client,
                                         prompt::PromptEngine(), config.token_budget);
      const char* headings[] = {"Description", "Surprises", "Summary"};
      for (std::size_t i = 0; i < d.responses.size(); ++i) {
        std::cout << "## " << headings[i] << "\n\n" << d.responses[i] << "\n\n";
      }
      return 0;
    }

    if (summarize->parsed()) {
      const auto entry = resolve_model(summarize_model_opts, paths);
      auto client = make_client(config, g, paths);
      const auto s = app::summarize_model(entry, *client, prompt::PromptEngine(),
                                          config.token_budget);
      for (const auto& d : s.descriptions) {
        std::cout << "## " << d.feature << "\n\n" << d.responses.back() << "\n\n";
      }
      std::cout << "## Model summary\n\n" << s.summary << "\n";
      return 0;
    }

    if (evalc->parsed()) {
      eval::BenchmarkConfig cfg;
      if (!tasks.empty()) {
        cfg.tasks.clear();
        for (const auto& t : tasks) cfg.tasks.push_back(prompt::task_type_from_string(t));
      }
      cfg.seed = g.seed;
      cfg.render.decimals = eval_decimals;
      if (samples > 0) cfg.read_value_samples_per_graph = samples;
      cfg.concurrency = concurrency > 0 ? concurrency : config.concurrency_limit;
      cfg.validate();

      std::vector<eval::BenchmarkGraph> graphs;
      if (!suite.empty() == !eval_model.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "eval needs either --model or --suite");
      }
      if (!suite.empty()) {
        graphs = app::bundled_suite(g.seed);
      } else {
        const auto entry = resolve_model({eval_model, eval_context}, paths);
        graphs = eval::model_graphs(entry.model, entry.context, entry.id);
      }
      const eval::GradeOptions grade{cfg.render.decimals};
      auto transport = app::make_eval_transport(config, transport_options(g), paths,
                                                eval::plan_benchmark(graphs, cfg), grade);
      llm::ChatClient client(transport, app::chat_params(config));
      const auto report = eval::run_benchmark(graphs, client, cfg);
      const auto report_id = app::content_report_id(report);
      eval::save_report(report, paths.report_file(report_id));
      if (!report_path.empty()) eval::save_report(report, report_path);
      if (print_json) {
        std::cout << eval::serialize_report(report);
      } else {
        std::cout << eval::render_report_table(report);
        std::cout << "Report: " << paths.report_file(report_id).string() << "\n";
      }
      for (const auto& f : report.self_check_failures) std::cerr << "self-check: " << f << "\n";
      return report.self_check_failures.empty() ? 0 : kExitSelfCheck;
    }

    if (perturb->parsed()) {
      auto entry = resolve_model(perturb_model, paths);
      app::Perturbation p;
      if (!perturb_feature.empty()) p.feature = perturb_feature;
      p.invert_y = invert;
      if (!swap.empty()) p.swap = std::pair{swap[0], swap[1]};
      entry.model = app::apply_perturbation(entry.model, p);
      if (!perturb_out.empty()) {
        gam::save_model(entry.model, perturb_out);
        std::cout << "wrote " << perturb_out << "\n";
      } else if (fs::is_regular_file(perturb_model.ref)) {
        gam::save_model(entry.model, perturb_model.ref);
        std::cout << "updated " << perturb_model.ref << "\n";
      } else {
        app::ModelStore store(paths);
        if (!perturb_as.empty()) {
          entry.source = "perturbation of " + entry.id;
          entry.id = perturb_as;
          store.create(entry);
        } else {
          store.replace(entry);
        }
        std::cout << "stored model " << entry.id << "\n";
      }
      return 0;
    }

    if (serve->parsed()) {
      auto c = config;
      if (!host.empty()) c.host = host;
      if (port >= 0) c.port = port;
      app::Service service(c, transport_options(g));
      const int bound = service.bind();
      std::cout << "listening on http://" << c.host << ":" << bound << " (store "
                << paths.root.string() << ")" << std::endl;
      service.run();
      return 0;
    }

    if (chat->parsed()) {
      const auto entry = resolve_model(chat_model, paths);
      auto client = make_client(config, g, paths);
      prompt::PromptEngine engine;
      app::SessionStore sessions(paths);
      auto session = app::start_session(
          entry, chat_feature.empty() ? std::nullopt : std::optional(chat_feature), engine);
      session.id = sessions.new_id();
      sessions.save(session);
      std::cout << "session " << session.id
                << " (type a question; /graph NAME shows a graph with the next question; "
                   "/quit ends)\n";
      std::optional<std::string> next_graph;
      std::string line;
      while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        if (line.empty()) continue;
        if (line == "/quit") break;
        if (line.rfind("/graph ", 0) == 0) {
          next_graph = line.substr(7);
          continue;
        }
        try {
          const auto reply = app::post_message(session, entry, line, next_graph, *client,
                                               engine, config.token_budget);
          next_graph.reset();
          sessions.save(session);
          std::cout << reply.content << "\n";
        } catch (const llm::TransportError& e) {
          std::cerr << "transport error after " << e.attempts() << " attempts: " << e.what()
                    << "\n";
        }
      }
      return 0;
    }
  } catch (const llm::TransportError& e) {
    std::cerr << "error: " << e.what() << " (attempts: " << e.attempts() << ")\n";
    return kExitTransport;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
