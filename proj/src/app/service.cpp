#include "gamtalk/app/service.hpp"

#include <regex>

#include <httplib.h>

#include "gamtalk/app/operations.hpp"
#include "gamtalk/error.hpp"
#include "gamtalk/eval/benchmark.hpp"
#include "gamtalk/file_util.hpp"
#include "gamtalk/gam/model_io.hpp"
#include "gamtalk/text/number_format.hpp"

namespace gamtalk::app {
namespace {

[[noreturn]] void bad_request(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

nlohmann::json parse_body(const ApiRequest& request) {
  if (request.body.empty()) return nlohmann::json::object();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(request.body);
  } catch (const nlohmann::json::parse_error& e) {
    bad_request(std::string("malformed JSON body: ") + e.what());
  }
  if (!j.is_object()) bad_request("request body must be a JSON object");
  return j;
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_request(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T required_field(const nlohmann::json& j, const char* key) {
  auto v = optional_field<T>(j, key);
  if (!v) bad_request(std::string("missing field '") + key + "'");
  return *v;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kTransport:
      return 502;
    case ErrorCode::kIo:
      return 500;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfDomain:
    case ErrorCode::kParse:
      return 400;
  }
  return 500;
}

ApiResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

nlohmann::ordered_json model_summary(const ModelEntry& entry) {
  nlohmann::ordered_json j;
  j["id"] = entry.id;
  j["source"] = entry.source;
  j["link"] = std::string(gam::to_string(entry.model.link));
  j["intercept"] = entry.model.intercept;
  j["target_description"] = entry.model.target_description;
  auto features = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < entry.model.terms.size(); ++i) {
    const auto& t = entry.model.terms[i];
    features.push_back({{"name", t.feature_name},
                        {"kind", std::string(gam::to_string(t.kind))},
                        {"bins", t.bin_count()},
                        {"importance", entry.model.importances[i]}});
  }
  j["features"] = std::move(features);
  return j;
}

prompt::DatasetContext context_from_body(const nlohmann::json& j) {
  if (!j.is_object()) bad_request("'context' must be an object");
  prompt::DatasetContext ctx{required_field<std::string>(j, "description"),
                             required_field<std::string>(j, "target_semantics")};
  ctx.validate();
  return ctx;
}

std::optional<std::size_t> query_size(const std::map<std::string, std::string>& query,
                                      const std::string& key) {
  auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  auto v = text::parse_double(it->second);
  if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
    bad_request("query parameter '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(*v);
}

}  // namespace

Service::Service(AppConfig config, TransportOptions transport)
    : config_(std::move(config)),
      paths_{config_.store_root},
      transport_options_(std::move(transport)),
      models_(paths_),
      sessions_(paths_) {
  config_.validate();
  paths_.ensure();
  transport_ = make_transport(config_, *transport_options_, paths_);
  client_ = std::make_unique<llm::ChatClient>(transport_, chat_params(config_),
                                              make_cache(config_, paths_));
}

Service::Service(AppConfig config, std::shared_ptr<llm::Transport> transport)
    : config_(std::move(config)),
      paths_{config_.store_root},
      transport_(std::move(transport)),
      models_(paths_),
      sessions_(paths_) {
  config_.validate();
  paths_.ensure();
  client_ = std::make_unique<llm::ChatClient>(transport_, chat_params(config_),
                                              make_cache(config_, paths_));
}

Service::~Service() { stop(); }

ApiResponse Service::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const llm::TransportError& e) {
    return {502, {{"error", e.what()}, {"attempts", e.attempts()}}};
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse Service::route(const ApiRequest& r) {
  static const std::regex kModel("^/models/([^/]+)$");
  static const std::regex kGraphs("^/models/([^/]+)/graphs$");
  static const std::regex kGraphText("^/models/([^/]+)/graphs/(.+)/text$");
  static const std::regex kPerturb("^/models/([^/]+)/perturb$");
  static const std::regex kSession("^/sessions/([^/]+)$");
  static const std::regex kMessages("^/sessions/([^/]+)/messages$");
  static const std::regex kReport("^/reports/([^/]+)$");
  const bool get = r.method == "GET";
  const bool post = r.method == "POST";
  std::smatch m;

  auto allow = [&](bool ok) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, "method " + r.method + " not allowed");
  };
  if (r.path == "/health") return {200, {{"status", "ok"}}};
  if (r.path == "/models") {
    allow(get || post);
    return get ? list_models() : create_model(parse_body(r));
  }
  if (std::regex_match(r.path, m, kModel)) {
    allow(get);
    return get_model(m[1]);
  }
  if (std::regex_match(r.path, m, kGraphs)) {
    allow(get);
    return list_graphs(m[1]);
  }
  if (std::regex_match(r.path, m, kGraphText)) {
    allow(get);
    return graph_text(m[1], m[2], r.query);
  }
  if (std::regex_match(r.path, m, kPerturb)) {
    allow(post);
    return perturb(m[1], parse_body(r));
  }
  if (r.path == "/sessions") {
    allow(post);
    return create_session(parse_body(r));
  }
  if (std::regex_match(r.path, m, kSession)) {
    allow(get);
    return get_session(m[1]);
  }
  if (std::regex_match(r.path, m, kMessages)) {
    allow(post);
    return post_session_message(m[1], parse_body(r));
  }
  if (r.path == "/eval/run") {
    allow(post);
    return run_eval(parse_body(r));
  }
  if (r.path == "/reports") {
    allow(get);
    return list_reports();
  }
  if (std::regex_match(r.path, m, kReport)) {
    allow(get);
    return get_report(m[1]);
  }
  return error_response(404, "no route for " + r.method + " " + r.path);
}

ApiResponse Service::create_model(const nlohmann::json& body) {
  auto id = optional_field<std::string>(body, "id");
  if (id) require_valid_id(*id);
  ModelEntry entry;
  if (body.contains("model")) {
    entry.model = gam::model_from_json(body.at("model"));
    entry.model.validate();
    if (!body.contains("context")) bad_request("an uploaded model needs a 'context'");
    entry.context = context_from_body(body.at("context"));
    entry.source = optional_field<std::string>(body, "source").value_or("upload");
    entry.id = id ? *id : content_model_id(entry.model);
  } else if (body.contains("train")) {
    const auto& train = body.at("train");
    if (!train.is_object()) bad_request("'train' must be an object");
    DatasetOptions data;
    const auto seed = optional_field<std::uint64_t>(train, "seed").value_or(0);
    data.seed = seed;
    if (auto csv = optional_field<std::string>(train, "csv_path")) data.csv_path = *csv;
    if (auto rows = optional_field<std::size_t>(train, "rows")) data.rows = *rows;
    gam::FitConfig fit;
    fit.random_seed = seed;
    if (train.contains("fit")) fit = fit_config_from_json(train.at("fit"), fit);
    entry = train_dataset_model(required_field<std::string>(train, "dataset"), data, fit, id);
  } else {
    bad_request("body needs either 'model' (upload) or 'train'");
  }
  models_.create(entry);
  return {201, model_summary(entry)};
}

ApiResponse Service::list_models() {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& id : models_.list()) arr.push_back(model_summary(models_.get(id)));
  return {200, {{"models", std::move(arr)}}};
}

ApiResponse Service::get_model(const std::string& id) {
  const auto entry = models_.get(id);
  auto j = model_summary(entry);
  j["context"] = {{"description", entry.context.description},
                  {"target_semantics", entry.context.target_semantics}};
  j["model"] = gam::model_to_json(entry.model);
  return {200, std::move(j)};
}

ApiResponse Service::list_graphs(const std::string& id) {
  const auto summary = model_summary(models_.get(id));
  return {200, {{"model_id", id}, {"graphs", summary.at("features")}}};
}

ApiResponse Service::graph_text(const std::string& id, const std::string& feature,
                                const std::map<std::string, std::string>& query) {
  const auto entry = models_.get(id);
  const auto* term = entry.model.find_term(feature);
  if (term == nullptr) {
    throw Error(ErrorCode::kNotFound,
                "model '" + id + "' has no feature '" + feature + "'");
  }
  text::RenderOptions opts;
  if (auto decimals = query_size(query, "decimals")) opts.decimals = static_cast<int>(*decimals);
  opts.validate();
  const auto budget = query_size(query, "budget");
  const auto served = serve_graph(*term, budget, opts);
  nlohmann::ordered_json j;
  j["model_id"] = id;
  j["feature"] = served.feature;
  j["text"] = served.text.text;
  j["tokens"] = served.tokens;
  j["budget"] = budget ? nlohmann::ordered_json(*budget) : nlohmann::ordered_json(nullptr);
  j["simplified"] = served.simplified;
  j["merges"] = served.merges;
  j["max_merge_gap"] = served.max_merge_gap;
  return {200, std::move(j)};
}

ApiResponse Service::perturb(const std::string& id, const nlohmann::json& body) {
  auto entry = models_.get(id);
  Perturbation p;
  p.feature = optional_field<std::string>(body, "feature");
  p.invert_y = optional_field<bool>(body, "invert_y").value_or(false);
  if (auto swap = optional_field<std::vector<std::string>>(body, "swap")) {
    if (swap->size() != 2) bad_request("'swap' needs exactly two categories");
    p.swap = std::pair{(*swap)[0], (*swap)[1]};
  }
  entry.model = apply_perturbation(entry.model, p);
  if (auto as = optional_field<std::string>(body, "as")) {
    entry.id = *as;
    entry.source = "perturbation of " + id;
    models_.create(entry);
    return {201, model_summary(entry)};
  }
  models_.replace(entry);
  return {200, model_summary(entry)};
}

ApiResponse Service::create_session(const nlohmann::json& body) {
  const auto entry = models_.get(required_field<std::string>(body, "model_id"));
  auto session = start_session(entry, optional_field<std::string>(body, "feature"), engine_);
  session.id = sessions_.new_id();
  sessions_.save(session);
  return {201, session_to_json(session)};
}

ApiResponse Service::get_session(const std::string& id) {
  return {200, session_to_json(sessions_.load(id))};
}

ApiResponse Service::post_session_message(const std::string& id, const nlohmann::json& body) {
  const auto content = required_field<std::string>(body, "content");
  const auto feature = optional_field<std::string>(body, "feature");
  if (!sessions_.exists(id)) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  std::lock_guard lock(sessions_.lock_for(id));
  auto session = sessions_.load(id);
  const auto entry = models_.get(session.model_id);
  const auto reply =
      post_message(session, entry, content, feature, *client_, engine_, config_.token_budget);
  sessions_.save(session);
  return {200,
          {{"reply", {{"role", "assistant"}, {"content", reply.content}}},
           {"transcript_length", session.transcript.size()}}};
}

ApiResponse Service::run_eval(const nlohmann::json& body) {
  eval::BenchmarkConfig cfg;
  if (auto tasks = optional_field<std::vector<std::string>>(body, "tasks")) {
    cfg.tasks.clear();
    for (const auto& t : *tasks) cfg.tasks.push_back(prompt::task_type_from_string(t));
  }
  cfg.seed = optional_field<std::uint64_t>(body, "seed").value_or(0);
  cfg.read_value_samples_per_graph = optional_field<int>(body, "samples_per_graph");
  if (auto d = optional_field<int>(body, "decimals")) cfg.render.decimals = *d;
  cfg.concurrency = config_.concurrency_limit;
  cfg.validate();

  std::vector<eval::BenchmarkGraph> graphs;
  if (auto model_id = optional_field<std::string>(body, "model_id")) {
    const auto entry = models_.get(*model_id);
    graphs = eval::model_graphs(entry.model, entry.context, entry.id);
  } else if (optional_field<std::string>(body, "suite") == "bundled") {
    graphs = bundled_suite(cfg.seed);
  } else {
    bad_request("body needs 'model_id' or \"suite\": \"bundled\"");
  }

  std::shared_ptr<llm::Transport> transport = transport_;
  if (transport_options_) {
    const eval::GradeOptions grade{cfg.render.decimals};
    transport = make_eval_transport(config_, *transport_options_, paths_,
                                    eval::plan_benchmark(graphs, cfg), grade);
  }
  llm::ChatClient client(transport, chat_params(config_));
  const auto report = eval::run_benchmark(graphs, client, cfg, engine_);
  const auto id = content_report_id(report);
  eval::save_report(report, paths_.report_file(id));

  auto tallies = nlohmann::ordered_json::array();
  for (const auto& t : report.tallies) {
    tallies.push_back({{"task", std::string(prompt::to_string(t.task))},
                       {"label", std::string(eval::task_label(t.task))},
                       {"successes", t.successes},
                       {"total", t.total}});
  }
  return {201,
          {{"report_id", id},
           {"tasks", std::move(tallies)},
           {"self_check_failures", report.self_check_failures.size()},
           {"table", eval::render_report_table(report)}}};
}

ApiResponse Service::list_reports() {
  std::vector<std::string> ids;
  if (std::filesystem::is_directory(paths_.reports())) {
    for (const auto& f : std::filesystem::directory_iterator(paths_.reports())) {
      if (f.path().extension() == ".json") ids.push_back(f.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return {200, {{"reports", ids}}};
}

ApiResponse Service::get_report(const std::string& id) {
  if (!valid_id(id) || !std::filesystem::exists(paths_.report_file(id))) {
    throw Error(ErrorCode::kNotFound, "no report '" + id + "'");
  }
  return {200, nlohmann::ordered_json::parse(read_file(paths_.report_file(id)))};
}

int Service::bind() {
  server_ = std::make_unique<httplib::Server>();
  const int threads = std::max(2, config_.concurrency_limit);
  server_->new_task_queue = [threads] {
    return new httplib::ThreadPool(static_cast<std::size_t>(threads));
  };
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query[k] = v;
    api.body = req.body;
    const auto out = handle(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  if (config_.port == 0) {
    const int port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + config_.host);
    return port;
  }
  if (!server_->bind_to_port(config_.host, config_.port)) {
    throw Error(ErrorCode::kIo,
                "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  }
  return config_.port;
}

void Service::run() {
  if (!server_) bind();
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace gamtalk::app
