#include "oto/service/service.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>
#include <json.hpp>

#include "oto/dataset/image.hpp"
#include "oto/dataset/preprocess.hpp"
#include "oto/nn/checkpoint.hpp"

namespace oto::service {

namespace {

using nlohmann::json;

Response error(int status, const std::string& message) { return {status, json{{"error", message}}.dump()}; }

ImageFormat format_for(std::string_view content_type) {
  std::string t(content_type.substr(0, content_type.find(';')));
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "image/png") return ImageFormat::Png;
  if (t == "image/jpeg" || t == "image/jpg") return ImageFormat::Jpeg;
  return ImageFormat::Unknown;
}

}  // namespace

InferenceService::InferenceService(ServiceConfig config) : config_(std::move(config)) {
  config_.decode.validate();
  classifier_ = classifier::ClassifierModel::load(config_.classifier_checkpoint);
  generator_ = generator::GeneratorModel::load(config_.generator_checkpoint);
  const auto& c = classifier_.config();
  const auto& g = generator_.config();
  health_body_ = json{{"status", "ok"},
                      {"classifier",
                       {{"hash", nn::checkpoint_hash(config_.classifier_checkpoint)},
                        {"input_size", c.input_size},
                        {"embedding_dim", c.embedding_dim},
                        {"num_classes", c.num_classes}}},
                      {"generator",
                       {{"hash", nn::checkpoint_hash(config_.generator_checkpoint)},
                        {"image_size", g.image_size},
                        {"image_dim", g.image_dim},
                        {"d_model", g.d_model},
                        {"heads", g.heads},
                        {"encoder_layers", g.encoder_layers},
                        {"decoder_layers", g.decoder_layers},
                        {"vocab_size", g.vocab_size}}}}
                     .dump();
}

Response InferenceService::classify(std::string_view body, std::string_view content_type) const {
  if (body.size() > config_.max_body_bytes) return error(413, "request body exceeds the size limit");
  const auto format = format_for(content_type);
  if (format == ImageFormat::Unknown) return error(400, "content type must be image/png or image/jpeg");
  try {
    const auto pixels = decode_image(body, format);
    const auto pred = classifier_.classify(preprocess_image(pixels, PreprocessMode::Classifier).data);
    json probs = json::object();
    for (auto l : kAllLabels) probs[std::string(label_name(l))] = pred.probabilities(code(l));
    return {200, json{{"label", std::string(label_name(pred.label()))}, {"probabilities", probs}}.dump()};
  } catch (const DecodeError& e) {
    return error(400, e.what());
  } catch (const std::exception&) {
    return error(500, "internal error");
  }
}

Response InferenceService::summarize(std::string_view body, std::string_view content_type,
                                     const std::optional<std::string>& label_override) const {
  if (body.size() > config_.max_body_bytes) return error(413, "request body exceeds the size limit");
  std::optional<ClassLabel> forced;
  if (label_override) {
    forced = parse_label(*label_override);
    if (!forced) return error(422, "unknown label override '" + *label_override + "'");
  }
  const auto format = format_for(content_type);
  if (format == ImageFormat::Unknown) return error(400, "content type must be image/png or image/jpeg");
  try {
    const auto pixels = decode_image(body, format);
    ClassLabel label;
    if (forced) {
      label = *forced;
    } else {
      label = classifier_.classify(preprocess_image(pixels, PreprocessMode::Classifier).data).label();
    }
    const auto summary =
        generator_.generate(preprocess_image(pixels, PreprocessMode::Generator).data, label, config_.decode);
    return {200, json{{"label", std::string(label_name(label))}, {"summary", summary}}.dump()};
  } catch (const DecodeError& e) {
    return error(400, e.what());
  } catch (const std::exception&) {
    return error(500, "internal error");
  }
}

Response InferenceService::health() const { return {200, health_body_}; }

struct HttpServer::Impl {
  const InferenceService& service;
  httplib::Server server;
  int port = 0;

  explicit Impl(const InferenceService& s) : service(s) {}
};

HttpServer::HttpServer(const InferenceService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  const auto& cfg = service.config();
  svr.set_payload_max_length(cfg.max_body_bytes);
  svr.set_read_timeout(cfg.timeout_seconds, 0);
  svr.set_write_timeout(cfg.timeout_seconds, 0);
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  const InferenceService* s = &service;
  svr.Post("/classify", [s, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, s->classify(req.body, req.get_header_value("Content-Type")));
  });
  svr.Post("/summarize", [s, reply](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> override_label;
    if (req.has_header("X-Label-Override")) override_label = req.get_header_value("X-Label-Override");
    reply(res, s->summarize(req.body, req.get_header_value("Content-Type"), override_label));
  });
  svr.Get("/health", [s, reply](const httplib::Request&, httplib::Response& res) { reply(res, s->health()); });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const std::string msg = res.status == 413 ? "request body exceeds the size limit" : "request failed";
      res.set_content(json{{"error", msg}}.dump(), "application/json; charset=utf-8");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto& cfg = impl_->service.config();
  if (cfg.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(cfg.host);
    if (impl_->port < 0) throw IoError("cannot bind " + cfg.host);
  } else {
    if (!impl_->server.bind_to_port(cfg.host, cfg.port)) {
      throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    }
    impl_->port = cfg.port;
  }
  return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace oto::service
