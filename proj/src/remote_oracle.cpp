#include <chrono>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "navvlm/guidance.hpp"

namespace navvlm {

using nlohmann::json;

std::string to_wire_json(const OracleRequest& request) {
  json body;
  body["goal"] = request.goal;
  body["prompt"] = std::string(to_string(request.prompt_kind));
  body["step"] = request.step;
  if (const auto* image = std::get_if<EncodedImage>(&request.observation)) {
    body["image_b64"] = image->base64;
    body["snapshot"] = nullptr;
  } else {
    const auto& snap = std::get<SceneSnapshot>(request.observation);
    body["image_b64"] = nullptr;
    body["snapshot"] = {{"ranges", snap.ranges}, {"fov", snap.fov}, {"visible_labels", snap.visible_labels}};
  }
  return body.dump();
}

std::optional<OracleReply> parse_wire_reply(PromptKind kind, std::string_view body) {
  const json reply = json::parse(body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) return std::nullopt;
  const auto raw = reply.find("raw_text");
  if (raw == reply.end() || !raw->is_string()) return std::nullopt;

  OracleReply out;
  out.raw_text = raw->get<std::string>();
  if (const auto latency = reply.find("latency_ms"); latency != reply.end() && latency->is_number()) {
    out.latency_ms = latency->get<double>();
  }
  // The server's own parse is advisory; ours decides.
  if (kind == PromptKind::DirectionQuery) {
    out.guidance = parse_oracle_reply(out.raw_text);
  } else {
    out.verdict = parse_termination_reply(out.raw_text);
  }
  return out;
}

RemoteOracle::RemoteOracle(RemoteOracleConfig config) : config_(std::move(config)) {
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
}

std::optional<OracleReply> RemoteOracle::post(const std::string& path, const OracleRequest& request) {
  last_reply_.reset();
  httplib::Client client(config_.base_url);
  if (!client.is_valid()) {
    std::clog << "navvlm: invalid remote oracle url '" << config_.base_url << "'\n";
    return std::nullopt;
  }
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout);
  const auto sec = static_cast<time_t>(timeout.count() / 1000000);
  const auto usec = static_cast<time_t>(timeout.count() % 1000000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const auto started = std::chrono::steady_clock::now();
  const auto res = client.Post(path, to_wire_json(request), "application/json");
  if (!res) {
    std::clog << "navvlm: remote oracle " << path << " failed: " << httplib::to_string(res.error()) << "\n";
    return std::nullopt;
  }
  if (res->status != 200) {
    std::clog << "navvlm: remote oracle " << path << " returned HTTP " << res->status << "\n";
    return std::nullopt;
  }
  auto reply = parse_wire_reply(request.prompt_kind, res->body);
  if (!reply) {
    std::clog << "navvlm: remote oracle " << path << " sent a malformed body\n";
    return std::nullopt;
  }
  if (reply->latency_ms == 0.0) {
    reply->latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  last_reply_ = reply;
  return reply;
}

Guidance RemoteOracle::direction(const OracleRequest& request) {
  OracleRequest r = request;
  r.prompt_kind = PromptKind::DirectionQuery;
  const auto reply = post("/v1/direction", r);
  return reply && reply->guidance ? *reply->guidance : Guidance::NoInfo;
}

TerminateVerdict RemoteOracle::termination(const OracleRequest& request) {
  OracleRequest r = request;
  r.prompt_kind = PromptKind::TerminationCheck;
  const auto reply = post("/v1/termination", r);
  return reply && reply->verdict ? *reply->verdict : TerminateVerdict::Continue;
}

}  // namespace navvlm
