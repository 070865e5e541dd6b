#include <doctest.h>

#include <cstdlib>

#include "../common/wire_stub.hpp"
#include "helpers.hpp"

using namespace navvlm;

TEST_CASE("wire: golden request/response files round-trip through the client") {
  for (const auto& c : wire_stub::run_golden_cases(NAVVLM_GOLDEN_DIR)) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.ok);
  }
}

TEST_CASE("wire: timeout, non-200, garbage and refused connections abstain") {
  for (const auto& c : wire_stub::run_failure_cases()) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.ok);
  }
}

TEST_CASE("wire: exactly one payload variant is non-null") {
  OracleRequest r;
  r.goal = "tv";
  const auto snap = nlohmann::json::parse(to_wire_json(r));
  CHECK(snap.at("image_b64").is_null());
  CHECK(snap.at("snapshot").is_object());
  r.observation = EncodedImage{"AAAA"};
  const auto img = nlohmann::json::parse(to_wire_json(r));
  CHECK(img.at("image_b64") == "AAAA");
  CHECK(img.at("snapshot").is_null());
}

TEST_CASE("wire: parse_wire_reply") {
  CHECK_FALSE(parse_wire_reply(PromptKind::DirectionQuery, "").has_value());
  CHECK_FALSE(parse_wire_reply(PromptKind::DirectionQuery, R"({"raw_text": 3})").has_value());
  const auto r = parse_wire_reply(PromptKind::DirectionQuery, R"({"raw_text": "go straight", "guidance": "left"})");
  REQUIRE(r.has_value());
  CHECK(r->guidance == Guidance::Forward);
  CHECK_FALSE(r->verdict.has_value());
  const auto t = parse_wire_reply(PromptKind::TerminationCheck, R"({"raw_text": "reached it"})");
  REQUIRE(t.has_value());
  CHECK(t->verdict == TerminateVerdict::Stop);
}

TEST_CASE("wire: NAVVLM_REMOTE_TIMEOUT_MS overrides the default") {
  unsetenv("NAVVLM_REMOTE_TIMEOUT_MS");
  CHECK(remote_timeout_from_env() == std::chrono::milliseconds(10000));
  setenv("NAVVLM_REMOTE_TIMEOUT_MS", "250", 1);
  CHECK(remote_timeout_from_env() == std::chrono::milliseconds(250));
  setenv("NAVVLM_REMOTE_TIMEOUT_MS", "soon", 1);
  CHECK(remote_timeout_from_env() == std::chrono::milliseconds(10000));
  unsetenv("NAVVLM_REMOTE_TIMEOUT_MS");
}

TEST_CASE("wire: client trims a trailing slash and sends to the right path") {
  wire_stub::StubServer stub;
  stub.set("/v1/direction", {200, R"({"raw_text": "right", "guidance": "right", "latency_ms": 2.0})", {}});
  RemoteOracle client({stub.url() + "/", std::chrono::milliseconds(2000)});
  OracleRequest r;
  r.goal = "sofa";
  CHECK(query_direction(client, r) == Guidance::Right);
  CHECK(stub.hits("/v1/direction") == 1);
  CHECK(stub.hits("/v1/termination") == 0);
}
