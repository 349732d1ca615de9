// tasktrace: batch pipeline over trace datasets and the collection service.
//
// Exit codes: 0 success, 1 validation or input failure, 2 usage error.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tasktrace/alignment.hpp"
#include "tasktrace/dataset.hpp"
#include "tasktrace/hmm.hpp"
#include "tasktrace/loops.hpp"
#include "tasktrace/markov.hpp"
#include "tasktrace/service/http_server.hpp"
#include "tasktrace/service/service.hpp"
#include "tasktrace/suggest.hpp"

namespace {

using namespace tasktrace;
using ojson = nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

// Thrown for input problems that should end the run with exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double value, int digits = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

void print_json(const ojson& doc) { std::cout << doc.dump() << '\n'; }

void report_line_errors(const JsonlContents& contents, const std::string& path) {
  for (const auto& e : contents.errors) {
    std::cerr << path << ":" << e.line << ": " << e.message << '\n';
  }
}

JsonlContents read_input(const std::string& path) {
  try {
    return read_jsonl_file(path);
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

// Hint files hold a JSON array of steps or {"hint": [...]}.
std::vector<ObservedStep> read_hint(const std::string& path) {
  auto doc = read_json_file(path);
  if (doc.is_object() && doc.contains("hint")) doc = doc.at("hint");
  if (!doc.is_array()) throw InputError(path + ": expected an array of steps or {\"hint\": [...]}");
  std::vector<ObservedStep> out;
  try {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(observed_step_from_json(doc[i], "hint[" + std::to_string(i) + "]"));
    }
  } catch (const SchemaError& e) {
    throw InputError(path + ": " + e.what());
  }
  return out;
}

std::vector<StepInstance> known_steps(const std::vector<ObservedStep>& observations,
                                      const std::string& path) {
  std::vector<StepInstance> out;
  for (const auto& o : observations) {
    if (!o.fully_known()) throw InputError(path + ": ambiguous steps need a model to resolve");
    out.push_back(*o.step);
  }
  return out;
}

ojson steps_json(std::span<const StepInstance> steps) {
  ojson out = ojson::array();
  for (const auto& s : steps) out.push_back(step_to_json(s));
  return out;
}

std::string describe_suggestion(const Suggestion& s) {
  if (const auto* step = s.step()) {
    return describe(*step) + (s.position ? " @" + std::to_string(*s.position) : "");
  }
  if (const auto* r = s.region()) {
    return "steps " + std::to_string(r->start) + ".." +
           std::to_string(r->start + r->length() - 1) + " (period " + std::to_string(r->period) +
           " x" + std::to_string(r->repetitions) + ")";
  }
  const auto* b = s.branch();
  std::string out = to_string(b->state) + " ->";
  for (const auto& alt : b->alternatives) {
    out += " " + to_string(alt.state) + " " + fixed(alt.probability);
  }
  return out;
}

void print_suggestion_table(const std::vector<Suggestion>& suggestions) {
  if (suggestions.empty()) {
    std::cout << "(no suggestions)\n";
    return;
  }
  std::cout << std::left << std::setw(4) << "#" << std::setw(14) << "kind" << std::setw(8)
            << "score" << "suggestion\n";
  for (std::size_t i = 0; i < suggestions.size(); ++i) {
    const auto& s = suggestions[i];
    std::cout << std::left << std::setw(4) << i + 1 << std::setw(14) << to_string(s.kind)
              << std::setw(8) << fixed(s.score) << describe_suggestion(s) << '\n';
  }
}

std::vector<Trace> category_traces(const std::vector<Trace>& traces, std::string& category,
                                   const std::string& input) {
  if (category.empty()) {
    std::set<std::string> seen;
    for (const auto& t : traces) seen.insert(t.category);
    if (seen.size() != 1) {
      throw InputError(input + ": holds " + std::to_string(seen.size()) +
                       " categories; pass --category");
    }
    category = *seen.begin();
  }
  std::vector<Trace> out;
  for (const auto& t : traces) {
    if (t.category == category) out.push_back(t);
  }
  if (out.empty()) throw InputError(input + ": no approved traces in category '" + category + "'");
  return out;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string out;
  bool json = false;
};

int run_ingest(const IngestArgs& a) {
  const auto contents = read_input(a.input);
  report_line_errors(contents, a.input);
  std::size_t approved = 0;
  for (const auto& r : contents.records) approved += r.report.approved() ? 1 : 0;
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + a.out + "'");
    const auto traces = contents.traces();
    write_traces_jsonl(out, traces);
  }
  if (a.json) {
    ojson errors = ojson::array();
    for (const auto& e : contents.errors) {
      errors.push_back({{"line", e.line},
                        {"path", e.path},
                        {"rule", e.rule ? ojson(rule_id(*e.rule)) : ojson(nullptr)},
                        {"message", e.message}});
    }
    print_json({{"traces", contents.records.size()},
                {"valid", approved},
                {"invalid", contents.records.size() - approved},
                {"errors", std::move(errors)}});
  } else {
    std::cout << "traces read     " << contents.records.size() << '\n'
              << "passing rules   " << approved << '\n'
              << "failing rules   " << contents.records.size() - approved << '\n'
              << "schema errors   " << contents.errors.size() << '\n';
  }
  return contents.errors.empty() ? kOk : kInvalid;
}

// ---------------------------------------------------------------- screen

struct ScreenArgs {
  std::string input;
  std::string out;
  std::string rejected;
  std::size_t threshold = 2;
  bool json = false;
};

int run_screen(const ScreenArgs& a) {
  const auto contents = read_input(a.input);
  report_line_errors(contents, a.input);
  if (!contents.errors.empty()) return kInvalid;
  const auto result = screen_records(contents.records, ScreeningRule{a.threshold});
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + a.out + "'");
    write_traces_jsonl(out, result.approved);
  }
  if (!a.rejected.empty()) {
    std::ofstream out(a.rejected, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + a.rejected + "'");
    for (const auto& r : result.rejected_traces) {
      out << serialize_record({r.trace, RecordStatus::rejected, r.report}) << '\n';
    }
  }
  if (a.json) {
    ojson rejected = ojson::array();
    for (const auto& r : result.rejected_traces) {
      rejected.push_back({{"id", r.trace.id},
                          {"worker_id", r.trace.worker_id},
                          {"worker_rejected", r.worker_rejected},
                          {"report", report_to_json(r.report)}});
    }
    print_json({{"approved", result.approved.size()},
                {"rejected", std::move(rejected)},
                {"rejected_workers", result.rejected_workers}});
  } else {
    std::cout << "approved traces   " << result.approved.size() << '\n'
              << "rejected traces   " << result.rejected_traces.size() << '\n'
              << "rejected workers  " << result.rejected_workers.size() << '\n';
    for (const auto& r : result.rejected_traces) {
      std::cout << "  " << r.trace.id << " (" << r.trace.worker_id << "): ";
      if (r.worker_rejected) {
        std::cout << "worker rejected";
      } else {
        for (std::size_t i = 0; i < r.report.violations.size(); ++i) {
          std::cout << (i ? ", " : "") << rule_id(r.report.violations[i].rule);
        }
      }
      std::cout << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::string input;
  bool approved_only = false;
  std::size_t threshold = 2;
  bool json = false;
};

int run_stats(const StatsArgs& a) {
  const auto contents = read_input(a.input);
  report_line_errors(contents, a.input);
  if (!contents.errors.empty()) return kInvalid;
  const auto traces = a.approved_only
                          ? screen_records(contents.records, ScreeningRule{a.threshold}).approved
                          : contents.traces();
  const auto s = dataset_stats(traces);
  if (a.json) {
    print_json(stats_to_json(s));
    return kOk;
  }
  auto summary = [](const std::optional<CountSummary>& c) {
    if (!c) return std::string("-");
    return fixed(c->mean, 2) + " (min " + std::to_string(c->min) + ", max " +
           std::to_string(c->max) + ")";
  };
  auto rate = [](const std::optional<double>& r) { return r ? fixed(*r, 2) : std::string("-"); };
  std::cout << std::left << std::setw(28) << "traces" << s.total_traces << '\n'
            << std::setw(28) << "workers" << s.total_workers << '\n'
            << std::setw(28) << "traces per category" << summary(s.per_category) << '\n'
            << std::setw(28) << "steps per trace" << summary(s.steps_per_trace) << '\n'
            << std::setw(28) << "total steps" << s.total_steps << '\n'
            << std::setw(28) << "descriptions" << s.total_descriptions << '\n'
            << std::setw(28) << "descriptions per step" << rate(s.description_rate) << '\n'
            << std::setw(28) << "workers describing steps" << s.workers_with_descriptions << '\n'
            << std::setw(28) << "workers using wait" << s.workers_using_wait << " ("
            << rate(s.wait_usage) << ")\n";
  for (const auto& [slug, count] : s.traces_per_category) {
    if (count > 0) std::cout << "  " << std::setw(26) << slug << count << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- build-model

struct BuildArgs {
  std::string input;
  std::string category;
  std::string abstraction = "kind";
  double alpha = 0.0;
  std::string out;
  std::string out_dir;
  std::size_t threshold = 2;
  bool json = false;
};

int run_build(const BuildArgs& a) {
  const auto abstraction = parse_abstraction(a.abstraction);
  if (!abstraction) throw CLI::ValidationError("--abstraction", "expected kind or kind+args");
  if (a.out.empty() == a.out_dir.empty()) {
    throw CLI::ValidationError("build-model", "pass exactly one of --out or --out-dir");
  }
  const auto contents = read_input(a.input);
  report_line_errors(contents, a.input);
  if (!contents.errors.empty()) return kInvalid;
  const auto approved = screen_records(contents.records, ScreeningRule{a.threshold}).approved;

  std::map<std::string, std::vector<Trace>> grouped;
  if (!a.out.empty()) {
    std::string category = a.category;
    auto traces = category_traces(approved, category, a.input);
    grouped.emplace(category, std::move(traces));
  } else {
    for (const auto& t : approved) {
      if (a.category.empty() || t.category == a.category) grouped[t.category].push_back(t);
    }
    std::filesystem::create_directories(a.out_dir);
  }

  ojson summary = ojson::array();
  for (const auto& [slug, traces] : grouped) {
    const auto model = build_markov(traces, *abstraction, a.alpha);
    const auto path = a.out.empty()
                          ? (std::filesystem::path(a.out_dir) / (slug + ".model.json")).string()
                          : a.out;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << model_to_json(model).dump(2) << '\n';
    summary.push_back({{"category", slug},
                       {"path", path},
                       {"trace_count", model.trace_count()},
                       {"states", model.states().size()}});
    if (!a.json) {
      std::cout << slug << ": " << model.trace_count() << " traces, " << model.states().size()
                << " states -> " << path << '\n';
    }
  }
  if (a.json) print_json({{"models", std::move(summary)}});
  return kOk;
}

// ---------------------------------------------------------------- suggest

struct SuggestArgs {
  std::string model;
  std::string hint;
  std::string traces;
  std::size_t k = 3;
  double branch_threshold = 0.2;
  double p_match = 0.9;
  double arg_weight = 0.5;
  bool json = false;
};

int run_suggest(const SuggestArgs& a) {
  MarkovModel model = [&] {
    try {
      return model_from_json(read_json_file(a.model));
    } catch (const std::invalid_argument& e) {
      throw InputError(a.model + ": " + e.what());
    }
  }();
  const auto observations = read_hint(a.hint);
  const Hmm hmm(model, EmissionParams{a.p_match, a.arg_weight});
  const auto hint = resolve_observations(hmm, observations);
  if (!hint) throw InputError(a.hint + ": inconsistent observation (zero likelihood under the model)");

  ojson out;
  out["hint"] = steps_json(*hint);
  std::vector<Suggestion> suggestions;
  if (a.traces.empty()) {
    const auto next = suggest_next(model, *hint, a.k);
    suggestions = next.suggestions;
    out["end_probability"] = next.end_probability;
    out["unknown_state"] = next.unknown_state;
  } else {
    const auto contents = read_input(a.traces);
    report_line_errors(contents, a.traces);
    if (!contents.errors.empty()) return kInvalid;
    std::vector<Trace> traces;
    for (const auto& t : screen_records(contents.records).approved) {
      if (t.category == model.category()) traces.push_back(t);
    }
    SuggestConfig config;
    config.k = a.k;
    config.branch_threshold = a.branch_threshold;
    suggestions = suggest_edits(model, traces, *hint, config);
  }
  out["suggestions"] = suggestions_to_json(suggestions);
  if (a.json) {
    print_json(out);
  } else {
    if (out.contains("unknown_state") && out["unknown_state"].get<bool>()) {
      std::cout << "unknown state: the model has never seen the hint's last step\n";
    }
    print_suggestion_table(suggestions);
    if (out.contains("end_probability")) {
      std::cout << "end of task: " << fixed(out["end_probability"].get<double>()) << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- diff

struct DiffArgs {
  std::string hint;
  std::string input;
  std::string category;
  bool json = false;
};

int run_diff(const DiffArgs& a) {
  const auto hint = known_steps(read_hint(a.hint), a.hint);
  const auto contents = read_input(a.input);
  report_line_errors(contents, a.input);
  if (!contents.errors.empty()) return kInvalid;
  std::string category = a.category;
  const auto traces = category_traces(screen_records(contents.records).approved, category, a.input);
  const auto diff = diff_against(hint, traces);
  const auto& best = traces[*diff.best_trace];
  if (a.json) {
    ojson ops = ojson::array();
    for (const auto& op : diff.alignment.ops) {
      ojson entry{{"op", to_string(op.type)}};
      if (op.type != EditType::insert) entry["source"] = op.source;
      if (op.type != EditType::remove) entry["target"] = op.target;
      ops.push_back(std::move(entry));
    }
    print_json({{"trace", best.id},
                {"cost", diff.alignment.cost},
                {"ops", std::move(ops)},
                {"suggestions", suggestions_to_json(diff.suggestions)}});
  } else {
    std::cout << "closest trace " << best.id << " (cost " << diff.alignment.cost << ")\n";
    print_suggestion_table(diff.suggestions);
  }
  return kOk;
}

// ---------------------------------------------------------------- loops

struct LoopsArgs {
  std::string hint;
  std::size_t min_reps = 2;
  bool json = false;
};

int run_loops(const LoopsArgs& a) {
  const auto steps = known_steps(read_hint(a.hint), a.hint);
  const auto suggestions = suggest_foreach(steps, a.min_reps);
  if (a.json) {
    print_json({{"suggestions", suggestions_to_json(suggestions)}});
  } else {
    print_suggestion_table(suggestions);
  }
  return kOk;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string listen = "127.0.0.1:8080";
  std::string data_dir = "data";
  double alpha = 0.0;
  std::string abstraction = "kind";
  std::size_t k = 3;
  std::size_t rebuild_every = 10;
  std::size_t threshold = 2;
  bool no_ack_gate = false;
  bool json = false;
};

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int run_serve(const ServeArgs& a) {
  const auto colon = a.listen.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected HOST:PORT");
  service::ServiceConfig config;
  config.host = a.listen.substr(0, colon);
  try {
    config.port = std::stoi(a.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--listen", "port must be a number");
  }
  const auto abstraction = parse_abstraction(a.abstraction);
  if (!abstraction) throw CLI::ValidationError("--abstraction", "expected kind or kind+args");
  config.data_dir = a.data_dir;
  config.models.abstraction = *abstraction;
  config.models.alpha = a.alpha;
  config.suggest.k = a.k;
  config.rebuild_every = a.rebuild_every;
  config.screening.worker_failure_threshold = a.threshold;
  config.require_acknowledgement = !a.no_ack_gate;

  std::unique_ptr<service::Service> svc;
  try {
    svc = std::make_unique<service::Service>(config);
  } catch (const service::StorageError& e) {
    throw InputError(e.what());
  }
  service::HttpServer server(*svc);
  const int port = server.bind(config.host, config.port);
  if (port < 0) throw InputError("cannot listen on " + a.listen);
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  if (a.json) {
    print_json({{"listening", config.host + ":" + std::to_string(port)},
                {"data_dir", config.data_dir.string()}});
  } else {
    std::cout << "listening on " << config.host << ":" << port << " (data in "
              << config.data_dir.string() << ")\n";
  }
  std::cout.flush();
  server.listen_after_bind();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace datasets, task models, and suggestions for service-robot tasks"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and canonicalize a JSON-lines trace file");
  ingest_cmd->add_option("--input", ingest.input, "Input .jsonl")->required();
  ingest_cmd->add_option("--out", ingest.out, "Write canonical traces here");
  ingest_cmd->add_flag("--json", ingest.json, "Emit JSON");

  ScreenArgs screen;
  auto* screen_cmd = app.add_subcommand("screen", "Apply the approval rules and worker screening");
  screen_cmd->add_option("--input", screen.input, "Input .jsonl")->required();
  screen_cmd->add_option("--out", screen.out, "Write approved traces here");
  screen_cmd->add_option("--rejected", screen.rejected, "Write rejected records here");
  screen_cmd->add_option("--threshold", screen.threshold, "Failed traces that reject a worker (0 disables)");
  screen_cmd->add_flag("--json", screen.json, "Emit JSON");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
  stats_cmd->add_option("--input", stats.input, "Input .jsonl")->required();
  stats_cmd->add_flag("--approved-only", stats.approved_only, "Screen before counting");
  stats_cmd->add_option("--threshold", stats.threshold, "Worker screening threshold");
  stats_cmd->add_flag("--json", stats.json, "Emit JSON");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-model", "Build a Markov task model from approved traces");
  build_cmd->add_option("--input", build.input, "Input .jsonl")->required();
  build_cmd->add_option("--category", build.category, "Category slug");
  build_cmd->add_option("--abstraction", build.abstraction, "kind or kind+args");
  build_cmd->add_option("--alpha", build.alpha, "Additive smoothing pseudo-count")
      ->check(CLI::NonNegativeNumber);
  build_cmd->add_option("--out", build.out, "Model file for a single category");
  build_cmd->add_option("--out-dir", build.out_dir, "Directory for <slug>.model.json files");
  build_cmd->add_option("--threshold", build.threshold, "Worker screening threshold");
  build_cmd->add_flag("--json", build.json, "Emit JSON");

  SuggestArgs suggest;
  auto* suggest_cmd = app.add_subcommand("suggest", "Suggest next steps (or all edits with --traces)");
  suggest_cmd->add_option("--model", suggest.model, "Model file")->required();
  suggest_cmd->add_option("--hint", suggest.hint, "Hint file: array of steps")->required();
  suggest_cmd->add_option("--traces", suggest.traces, "Traces for missing-step diffs");
  suggest_cmd->add_option("--k", suggest.k, "Number of next steps")->check(CLI::PositiveNumber);
  suggest_cmd->add_option("--branch-threshold", suggest.branch_threshold, "Branch probability threshold")
      ->check(CLI::Range(0.0, 1.0));
  suggest_cmd->add_option("--p-match", suggest.p_match, "Emission kind-match probability");
  suggest_cmd->add_option("--arg-weight", suggest.arg_weight, "Emission argument-overlap weight");
  suggest_cmd->add_flag("--json", suggest.json, "Emit JSON");

  DiffArgs diff;
  auto* diff_cmd = app.add_subcommand("diff", "Missing steps from the closest trace");
  diff_cmd->add_option("--hint", diff.hint, "Hint file: array of steps")->required();
  diff_cmd->add_option("--input", diff.input, "Traces .jsonl")->required();
  diff_cmd->add_option("--category", diff.category, "Category slug");
  diff_cmd->add_flag("--json", diff.json, "Emit JSON");

  LoopsArgs loops;
  auto* loops_cmd = app.add_subcommand("loops", "Detect repeated blocks and suggest foreach loops");
  loops_cmd->add_option("--hint", loops.hint, "Hint file: array of steps")->required();
  loops_cmd->add_option("--min-reps", loops.min_reps, "Minimum repetitions")->check(CLI::Range(2, 1 << 20));
  loops_cmd->add_flag("--json", loops.json, "Emit JSON");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP collection and suggestion service");
  serve_cmd->add_option("--listen", serve.listen, "HOST:PORT");
  serve_cmd->add_option("--data-dir", serve.data_dir, "Directory holding the trace log");
  serve_cmd->add_option("--alpha", serve.alpha, "Additive smoothing pseudo-count")
      ->check(CLI::NonNegativeNumber);
  serve_cmd->add_option("--abstraction", serve.abstraction, "kind or kind+args");
  serve_cmd->add_option("--k", serve.k, "Default number of next steps")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--rebuild-every", serve.rebuild_every, "Approved submissions per rebuild (0: manual)");
  serve_cmd->add_option("--threshold", serve.threshold, "Worker screening threshold");
  serve_cmd->add_flag("--no-ack-gate", serve.no_ack_gate, "Accept submissions without acknowledgement");
  serve_cmd->add_flag("--json", serve.json, "Emit JSON");

  try {
    app.parse(argc, argv);
    if (*ingest_cmd) return run_ingest(ingest);
    if (*screen_cmd) return run_screen(screen);
    if (*stats_cmd) return run_stats(stats);
    if (*build_cmd) return run_build(build);
    if (*suggest_cmd) return run_suggest(suggest);
    if (*diff_cmd) return run_diff(diff);
    if (*loops_cmd) return run_loops(loops);
    if (*serve_cmd) return run_serve(serve);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
