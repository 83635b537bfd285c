#include "gamtalk/app/operations.hpp"

#include "gamtalk/error.hpp"
#include "gamtalk/eval/oracles.hpp"
#include "gamtalk/gam/model_io.hpp"
#include "gamtalk/gam/trainer.hpp"
#include "gamtalk/text/simplify.hpp"

namespace gamtalk::app {
namespace {

const gam::GraphTerm& find_term(const ModelEntry& entry, std::string_view feature) {
  const auto* term = entry.model.find_term(feature);
  if (term == nullptr) {
    throw Error(ErrorCode::kNotFound, "model '" + entry.id + "' has no feature '" +
                                          std::string(feature) + "'");
  }
  return *term;
}

prompt::Message complete(llm::ChatClient& client, std::vector<prompt::Message>& messages) {
  auto reply = client.complete(messages);
  messages.push_back(reply);
  return reply;
}

}  // namespace

std::string content_model_id(const gam::GamModel& model) {
  return "m-" + llm::sha256_hex(gam::serialize_model(model)).substr(0, 12);
}

gam::FitConfig fit_config_from_json(const nlohmann::json& j, gam::FitConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "fit settings must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "max_bins") {
        base.max_bins = value.get<int>();
      } else if (key == "outer_bags") {
        base.outer_bags = value.get<int>();
      } else if (key == "learning_rate") {
        base.learning_rate = value.get<double>();
      } else if (key == "boosting_rounds") {
        base.boosting_rounds = value.get<int>();
      } else if (key == "early_stopping_rounds") {
        base.early_stopping_rounds = value.get<int>();
      } else if (key == "early_stopping_tolerance") {
        base.early_stopping_tolerance = value.get<double>();
      } else if (key == "validation_fraction") {
        base.validation_fraction = value.get<double>();
      } else if (key == "max_leaves") {
        base.max_leaves = value.get<int>();
      } else if (key == "random_seed") {
        base.random_seed = value.get<std::uint64_t>();
      } else if (key == "link") {
        base.link = gam::link_from_string(value.get<std::string>());
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown fit setting '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad fit setting: ") + e.what());
  }
  base.validate();
  return base;
}

ModelEntry train_dataset_model(std::string_view dataset, const DatasetOptions& data,
                               const gam::FitConfig& fit, std::optional<std::string> id) {
  Dataset ds = load_bundled_dataset(dataset, data);
  ModelEntry entry;
  entry.model = gam::fit_gam(ds.table, fit);
  entry.id = id ? *id : content_model_id(entry.model);
  require_valid_id(entry.id);
  entry.source = ds.name;
  entry.context = std::move(ds.context);
  return entry;
}

ServedGraph serve_graph(const gam::GraphTerm& term, std::optional<std::size_t> budget,
                        const text::RenderOptions& opts,
                        const text::TokenEstimator& estimator) {
  ServedGraph out;
  out.feature = term.feature_name;
  out.text = text::render_graph_text(term, opts);
  out.tokens = estimator.count(out.text.text);
  if (budget && out.tokens > *budget) {
    auto simplified = text::simplify_graph(term, *budget, estimator, opts);
    out.text = text::render_graph_text(simplified.term, opts);
    out.tokens = simplified.tokens;
    out.simplified = true;
    out.merges = simplified.merges;
    out.max_merge_gap = simplified.max_merge_gap;
  }
  return out;
}

gam::GamModel apply_perturbation(const gam::GamModel& model, const Perturbation& p) {
  if (p.invert_y == p.swap.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "a perturbation is either invert_y or a category swap");
  }
  if (p.swap) {
    if (!p.feature) throw Error(ErrorCode::kInvalidArgument, "a swap needs a feature");
    return eval::swap_model_categories(model, *p.feature, p.swap->first, p.swap->second);
  }
  if (p.feature) return eval::invert_model_term(model, *p.feature);
  gam::GamModel out = model;
  for (auto& term : out.terms) term = eval::perturb_invert_y(term);
  return out;
}

Session start_session(const ModelEntry& entry, std::optional<std::string> feature,
                      const prompt::PromptEngine& engine) {
  if (feature) find_term(entry, *feature);
  Session s;
  s.model_id = entry.id;
  s.feature = std::move(feature);
  s.context = entry.context;
  s.transcript = engine.context_prefix(entry.context);
  s.created_at = s.updated_at = utc_now();
  return s;
}

prompt::Message post_message(Session& session, const ModelEntry& entry,
                             const std::string& content,
                             const std::optional<std::string>& feature,
                             llm::ChatClient& client, const prompt::PromptEngine& engine,
                             std::optional<std::size_t> token_budget) {
  if (content.empty()) throw Error(ErrorCode::kInvalidArgument, "message content is empty");
  std::optional<std::string> graph_feature = feature;
  if (!graph_feature && session.feature && session.transcript.size() == 3) {
    graph_feature = session.feature;
  }
  auto messages = session.transcript;
  if (graph_feature) {
    const auto served = serve_graph(find_term(entry, *graph_feature), token_budget);
    messages.push_back(engine.graph_message(served.text, content));
  } else {
    messages.push_back({prompt::Role::kUser, content});
  }
  auto reply = complete(client, messages);
  session.transcript = std::move(messages);
  if (graph_feature) session.feature = graph_feature;
  session.updated_at = utc_now();
  return reply;
}

Description describe_graph(const ModelEntry& entry, const std::string& feature,
                           llm::ChatClient& client, const prompt::PromptEngine& engine,
                           std::optional<std::size_t> token_budget) {
  const auto served = serve_graph(find_term(entry, feature), token_budget);
  const auto task = prompt::TaskKind::describe();
  auto conv = engine.graph_conversation(entry.context, served.text, task);
  Description out;
  out.feature = feature;
  for (int turn = 1; turn <= prompt::turn_count(task.type); ++turn) {
    if (turn > 1) conv.messages.push_back(*engine.next_turn(task, turn));
    out.responses.push_back(complete(client, conv.messages).content);
  }
  out.transcript = std::move(conv.messages);
  return out;
}

ModelSummary summarize_model(const ModelEntry& entry, llm::ChatClient& client,
                             const prompt::PromptEngine& engine, std::optional<std::size_t> token_budget) {
  ModelSummary out;
  std::vector<std::pair<std::string, std::string>> summaries;
  std::vector<std::pair<std::string, double>> importances;
  for (std::size_t i = 0; i < entry.model.terms.size(); ++i) {
    const auto& name = entry.model.terms[i].feature_name;
    auto d = describe_graph(entry, name, client, engine, token_budget);
    summaries.emplace_back(name, d.responses.back());
    importances.emplace_back(name, entry.model.importances[i]);
    out.descriptions.push_back(std::move(d));
  }
  out.prompt = engine.model_summary_prompt(entry.context, summaries, importances);
  out.summary = client.complete(out.prompt.messages).content;
  return out;
}

std::vector<eval::BenchmarkGraph> bundled_suite(std::uint64_t seed,
                                                const DatasetOptions& data) {
  std::vector<eval::BenchmarkGraph> graphs;
  gam::FitConfig fit;
  fit.random_seed = seed;
  for (const char* name : {"iris", "diabetes", "synthetic_additive"}) {
    DatasetOptions opts = data;
    opts.csv_path.reset();
    opts.seed = seed;
    auto entry = train_dataset_model(name, opts, fit, std::string(name));
    auto part = eval::model_graphs(entry.model, entry.context, name);
    graphs.insert(graphs.end(), part.begin(), part.end());
  }
  return graphs;
}

std::string content_report_id(const eval::BenchmarkReport& report) {
  return "r-" + llm::sha256_hex(eval::serialize_report(report)).substr(0, 12);
}

}  // namespace gamtalk::app
