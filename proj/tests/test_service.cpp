#include <doctest.h>

#include <httplib.h>

#include <sstream>
#include <thread>

#include "support.hpp"
#include "tasktrace/service/http_server.hpp"
#include "tasktrace/service/service.hpp"

using namespace tasktrace;
using namespace tasktrace::service;
using nlohmann::json;
using testing::make_trace;
using testing::s;
using K = StepKind;

namespace {

ServiceConfig config_for(const std::filesystem::path& dir) {
  ServiceConfig c;
  c.data_dir = dir;
  return c;
}

std::string session(Service& svc) { return json::parse(svc.acknowledge_session("{}").body)["session"]; }

json body(const Response& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("submission status codes") {
  testing::TempDir dir;
  Service svc(config_for(dir.path()));
  const auto tok = session(svc);
  const auto t1 = serialize_trace(testing::f1()[0]);

  CHECK(svc.submit_trace(t1, std::nullopt).status == 403);
  CHECK(svc.submit_trace(t1, std::string("deadbeef")).status == 403);

  auto r = svc.submit_trace(t1, tok);
  CHECK(r.status == 201);
  CHECK(body(r)["status"] == "approved");
  CHECK(body(r)["id"] == "t1");
  CHECK(svc.submit_trace(t1, tok).status == 409);

  const auto one = make_trace("one", "mail", "w", {s(K::grab, {"mail"})});
  r = svc.submit_trace(serialize_trace(one), tok);
  CHECK(r.status == 201);
  CHECK(body(r)["status"] == "rejected");
  CHECK(body(r)["report"]["violations"][0]["rule"] == "MIN_STEPS");
  CHECK(svc.store().find("one")->status == RecordStatus::rejected);

  r = svc.submit_trace(R"({"id":"f","category":"mail","worker_id":"w","created_at":"2022-01-01T00:00:00Z",)"
                       R"("steps":[{"kind":"fly","args":{}},{"kind":"wait"}]})",
                       tok);
  CHECK(r.status == 422);
  CHECK(body(r)["rule"] == "UNKNOWN_KIND");
  CHECK(body(r)["path"] == "steps[0].kind");
  CHECK_FALSE(svc.store().contains("f"));

  r = svc.submit_trace("{\"id\": ", tok);
  CHECK(r.status == 400);
  CHECK(body(r)["path"] == "(root)");

  auto laundry = testing::f1()[1];
  laundry.category = "laundry";
  r = svc.submit_trace(serialize_trace(laundry), tok);
  CHECK(r.status == 400);
  CHECK(body(r)["rule"] == "UNKNOWN_CATEGORY");
  CHECK(svc.store().size() == 2);
}

TEST_CASE("storage failure is a 500 and nothing is kept") {
  if (!std::filesystem::exists("/dev/full")) return;
  testing::TempDir dir;
  auto cfg = config_for(dir.path());
  cfg.store.log_file = "/dev/full";
  cfg.require_acknowledgement = false;
  Service svc(cfg);
  const auto r = svc.submit_trace(serialize_trace(testing::f1()[0]), std::nullopt);
  CHECK(r.status == 500);
  CHECK_FALSE(svc.store().contains("t1"));
  CHECK(svc.store().size() == 0);
}

TEST_CASE("categories and toolbox endpoints") {
  testing::TempDir dir;
  Service svc(config_for(dir.path()));
  auto r = svc.list_categories();
  CHECK(r.status == 200);
  CHECK(body(r).size() == 18);
  CHECK(body(r)[0].contains("layout_hints"));
  r = svc.category_steps("mail");
  CHECK(r.status == 200);
  const auto steps = body(r)["steps"];
  CHECK(steps.size() == 17);
  bool saw_wait = false;
  for (const auto& st : steps) {
    if (st["kind"] == "wait") {
      saw_wait = true;
      CHECK(st["description"] == "wait for something to happen");
      CHECK(st["slots"].empty());
    }
  }
  CHECK(saw_wait);
  CHECK(svc.category_steps("laundry").status == 404);
}

TEST_CASE("suggestions after seeding F1") {
  testing::TempDir dir;
  Service svc(config_for(dir.path()));
  const auto tok = session(svc);
  CHECK(svc.suggest("mail", "{}").status == 404);
  CHECK(body(svc.suggest("mail", "{}"))["error"] == "model not ready");
  for (const auto& t : testing::f1()) CHECK(svc.submit_trace(serialize_trace(t), tok).status == 201);
  CHECK(svc.suggest("mail", "{}").status == 404);

  auto r = svc.rebuild_models();
  CHECK(r.status == 200);
  CHECK(body(r)["categories"]["mail"]["status"] == "ready");
  CHECK(body(r)["categories"]["mail"]["trace_count"] == 3);
  CHECK(body(r)["categories"]["greeting"]["status"] == "model not ready");

  r = svc.suggest("mail", testing::read_file(testing::fixture("hint_mail.json")).insert(0, "{\"hint\":") + "}");
  REQUIRE(r.status == 200);
  auto top = body(r)["suggestions"][0];
  CHECK(top["kind"] == "next_step");
  CHECK(top["step"]["kind"] == "deliver");
  CHECK(top["score"] == 1.0);

  r = svc.suggest("mail", R"({"hint": []})");
  REQUIRE(r.status == 200);
  CHECK(body(r)["suggestions"][0]["step"]["kind"] == "move_to");

  r = svc.suggest("mail", R"({"hint": [{"kind":"move_to","args":{"target":"front door"}},)"
                          R"({"kind":"grab","args":{"item":"mail"}},{"kind":null,"args":["mail"]}]})");
  REQUIRE(r.status == 200);
  CHECK(body(r)["hint"][2]["kind"] == "deliver");

  r = svc.suggest("mail", R"({"hint": [{"kind":null},{"kind":null},{"kind":null},{"kind":null}]})");
  CHECK(r.status == 422);
  CHECK(body(r)["error"].get<std::string>().rfind("inconsistent observation", 0) == 0);
  CHECK(svc.suggest("laundry", "{}").status == 404);
  CHECK(svc.suggest("mail", "{").status == 400);
  CHECK(svc.suggest("mail", R"({"k": 0})").status == 400);
  CHECK(svc.suggest("mail", R"({"hint": [{"kind":"teleport"}]})").status == 422);

  r = svc.stats();
  CHECK(body(r)["total_traces"] == 3);
}

TEST_CASE("empty store stats") {
  testing::TempDir dir;
  Service svc(config_for(dir.path()));
  const auto st = body(svc.stats());
  CHECK(st["total_traces"] == 0);
  CHECK(st["total_steps"] == 0);
  CHECK(st["steps_per_trace"]["mean"].is_null());
}

TEST_CASE("rebuild trigger fires every N approved submissions") {
  testing::TempDir dir;
  auto cfg = config_for(dir.path());
  cfg.rebuild_every = 2;
  Service svc(cfg);
  const auto tok = session(svc);
  const auto traces = testing::f1();
  const auto v0 = svc.models()->version;
  svc.submit_trace(serialize_trace(traces[0]), tok);
  CHECK(svc.models()->version == v0);
  svc.submit_trace(serialize_trace(make_trace("bad", "mail", "w", {s(K::wait)})), tok);
  CHECK(svc.models()->version == v0);
  svc.submit_trace(serialize_trace(traces[1]), tok);
  CHECK(svc.models()->version == v0 + 1);
  CHECK(svc.models()->find("mail")->model().trace_count() == 2);
}

TEST_CASE("unchanged categories keep their model version") {
  testing::TempDir dir;
  auto cfg = config_for(dir.path());
  cfg.require_acknowledgement = false;
  cfg.rebuild_every = 0;
  Service svc(cfg);
  for (const auto& t : testing::f1()) svc.submit_trace(serialize_trace(t), std::nullopt);
  const auto v1 = body(svc.rebuild_models());
  svc.submit_trace(serialize_trace(make_trace("g", "greeting", "w", {s(K::approach, {"guest"}), s(K::say, {"hi"})})),
                   std::nullopt);
  const auto v2 = body(svc.rebuild_models());
  CHECK(v2["version"] == v1["version"].get<int>() + 1);
  CHECK(v2["categories"]["mail"]["version"] == v1["categories"]["mail"]["version"]);
  CHECK(v2["categories"]["greeting"]["version"] == v2["version"]);
}

TEST_CASE("restart keeps submissions and sessions") {
  testing::TempDir dir;
  std::string tok;
  {
    Service svc(config_for(dir.path()));
    tok = session(svc);
    for (const auto& t : testing::f1()) svc.submit_trace(serialize_trace(t), tok);
    svc.submit_trace(serialize_trace(make_trace("one", "mail", "w", {s(K::wait)})), tok);
  }
  Service again(config_for(dir.path()));
  const auto exported = again.export_traces();
  CHECK(exported.content_type == "application/x-ndjson");
  std::istringstream in(exported.body);
  const auto contents = read_jsonl(in);
  CHECK(contents.errors.empty());
  std::vector<std::string> ids;
  for (const auto& r : contents.records) ids.push_back(r.trace.id);
  CHECK(ids == std::vector<std::string>{"t1", "t2", "t3", "one"});
  CHECK(contents.records[3].status == RecordStatus::rejected);
  CHECK(again.models()->find("mail")->model().trace_count() == 3);
  CHECK(again.submit_trace(serialize_trace(make_trace("t9", "mail", "w", {s(K::wait), s(K::wait)})), tok).status ==
        201);
}

TEST_CASE("store supersede and malformed logs") {
  testing::TempDir dir;
  {
    TraceStore store(dir.path());
    auto rec = record_for(testing::f1()[0]);
    CHECK(store.append(rec));
    CHECK_FALSE(store.append(rec));
    rec.status = RecordStatus::pending_review;
    store.supersede(rec);
    CHECK(store.find("t1")->status == RecordStatus::pending_review);
    CHECK(store.size() == 1);
    CHECK_THROWS_AS(store.supersede(record_for(testing::f1()[1])), std::invalid_argument);
  }
  {
    TraceStore store(dir.path());
    CHECK(store.find("t1")->status == RecordStatus::pending_review);
    CHECK(store.size() == 1);
  }
  {
    std::ofstream out(dir.path() / "traces.jsonl", std::ios::app);
    out << "{garbage\n";
  }
  CHECK_THROWS_AS(TraceStore(dir.path()), StorageError);
  CHECK_THROWS_AS(TraceStore(dir.path() / "missing"), StorageError);
}

TEST_CASE("categories file overrides the built-in prompts") {
  testing::TempDir dir;
  auto cats = default_categories();
  cats[0].prompt_text = "custom prompt";
  {
    std::ofstream out(dir.path() / "categories.json");
    out << categories_to_json(cats).dump();
  }
  Service svc(config_for(dir.path()));
  CHECK(body(svc.list_categories())[0]["prompt_text"] == "custom prompt");
}

TEST_CASE("HTTP endpoints") {
  testing::TempDir dir;
  Service svc(config_for(dir.path()));
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  httplib::Client cli("127.0.0.1", port);

  auto res = cli.Get("/categories");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).size() == 18);
  res = cli.Get("/categories/mail/steps");
  CHECK(res->status == 200);
  res = cli.Get("/categories/nope/steps");
  CHECK(res->status == 404);

  res = cli.Post("/traces", serialize_trace(testing::f1()[0]), "application/json");
  CHECK(res->status == 403);
  res = cli.Post("/sessions/acknowledge", "{\"worker_id\":\"w1\"}", "application/json");
  REQUIRE(res->status == 201);
  const std::string tok = json::parse(res->body)["session"];
  httplib::Headers headers{{"X-Session-Token", tok}};
  for (const auto& t : testing::f1()) {
    res = cli.Post("/traces", headers, serialize_trace(t), "application/json");
    CHECK(res->status == 201);
  }
  res = cli.Post("/models/rebuild", "", "application/json");
  CHECK(res->status == 200);
  res = cli.Post("/categories/mail/suggest",
                 R"({"hint":[{"kind":"move_to","args":{"target":"front door"}},{"kind":"grab","args":{"item":"mail"}}],"k":1})",
                 "application/json");
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body)["suggestions"][0]["step"]["kind"] == "deliver");
  res = cli.Get("/traces/export");
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type").find("application/x-ndjson") == 0);
  res = cli.Get("/stats");
  CHECK(json::parse(res->body)["total_traces"] == 3);

  server.stop();
  runner.join();
  CHECK_FALSE(server.is_running());
}
