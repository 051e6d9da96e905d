// bumpwatch command line: simulate, extract, train, classify, eval, serve, replay.
#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "bumpwatch/bumpwatch.hpp"

namespace fs = std::filesystem;
using namespace bumpwatch;

namespace {

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

const std::map<std::string, bool> kOnOff{{"on", true}, {"off", false}};

struct DetectorFlags {
  double threshold = 1.0;
  double frame_ms = 500.0;
  double padding_ms = 50.0;

  void add_to(CLI::App* app) {
    app->add_option("--threshold", threshold, "peak threshold in m/s^2 (symmetric)")
        ->check(CLI::PositiveNumber);
    app->add_option("--frame-ms", frame_ms, "event frame length");
    app->add_option("--padding-ms", padding_ms, "samples kept before the entry point");
  }

  DetectorConfig config(double rate_hz = 100.0) const {
    DetectorConfig d;
    d.pos_thresh = threshold;
    d.neg_thresh = -threshold;
    d.rate_hz = rate_hz;
    d.geometry = FrameGeometry::from_ms(rate_hz, frame_ms, padding_ms);
    return d;
  }
};

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

EventsFile load_events(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open events file " + p.string());
  return read_events(in);
}

std::vector<SegmentId> parse_segment_list(const std::string& s) {
  if (s == "all") return {};
  std::vector<SegmentId> out;
  for (auto f : split_fields(s)) out.push_back(parse_segment(std::string(f)));
  return out;
}

LabeledRecording load_labeled(const fs::path& p) {
  auto r = read_recording(p);
  if (!r.labels) throw InputError("recording " + p.string() + " has no label sidecar");
  return {std::move(r.stream), std::move(*r.labels)};
}

void log_warnings(const std::vector<std::string>& w) {
  for (const auto& m : w) std::cerr << "warning: " << m << '\n';
}

// ---- subcommands ----------------------------------------------------------------

struct SimulateArgs {
  std::string segments = "all";
  std::size_t per_segment = 50;
  std::uint64_t seed = 42;
  double noise_minutes = 10.0;
  fs::path out;
};

// Writes train.csv (seed), test.csv (seed + 1, one extra impact per segment) and
// noise.csv (seed + 2), each recording with its label sidecar.
void run_simulate(const SimulateArgs& a) {
  fs::create_directories(a.out);
  CorpusOptions co;
  co.segments = parse_segment_list(a.segments);
  co.per_segment = a.per_segment;
  co.seed = a.seed;
  const auto train = generate_corpus(co);
  write_recording(a.out / "train.csv", train.stream, &train.labels);

  co.per_segment = a.per_segment + 1;
  co.seed = a.seed + 1;
  const auto test = generate_corpus(co);
  write_recording(a.out / "test.csv", test.stream, &test.labels);

  if (a.noise_minutes > 0.0) {
    RecordingOptions ro;
    ro.seed = a.seed + 2;
    const auto noise = generate_recording({}, a.noise_minutes * 60.0, ro);
    write_recording(a.out / "noise.csv", noise.stream, &noise.labels);
  }
  std::cout << "train: " << train.labels.size() << " impacts, test: " << test.labels.size()
            << " impacts -> " << a.out.string() << '\n';
}

struct ExtractArgs {
  fs::path input, out;
  bool filter = false;
  DetectorFlags det;
};

void run_extract(const ExtractArgs& a) {
  auto rec = read_recording(a.input);
  PipelineConfig cfg;
  cfg.detector = a.det.config(rec.stream.rate_hz());
  if (a.filter) cfg.filter = FilterSpec{20.0, rec.stream.rate_hz(), 2};
  std::vector<std::string> warnings;
  auto events = extract_events(rec.stream, cfg, &warnings);
  log_warnings(warnings);
  std::size_t labeled = 0;
  if (rec.labels) labeled = attach_labels(events, *rec.labels);
  auto out = open_out(a.out);
  write_events(out, {{a.filter, rec.stream.rate_hz(), cfg.detector.geometry}, events});
  std::cout << events.size() << " events";
  if (rec.labels) std::cout << ", " << labeled << " labeled of " << rec.labels->size() << " planted";
  std::cout << '\n';
}

struct TrainArgs {
  std::string approach = "median";
  bool filter = false;
  fs::path input, out;
  std::uint64_t seed = 42;
};

void run_train(const TrainArgs& a) {
  const auto ev = load_events(a.input);
  if (ev.header.filtered != a.filter)
    throw ConfigError(std::string("events were extracted with filter ") +
                      (ev.header.filtered ? "on" : "off") + " but --filter is " +
                      (a.filter ? "on" : "off"));
  std::vector<EventFrame> frames;
  for (const auto& e : ev.events)
    if (e.frame.label) frames.push_back(e.frame);
  if (frames.size() != ev.events.size())
    std::cerr << "warning: skipped " << ev.events.size() - frames.size() << " unlabeled events\n";
  BuildOptions opt;
  opt.prune.seed = a.seed;
  std::vector<std::string> warnings;
  const auto model = build_model(frames, parse_approach(a.approach), a.filter, opt, &warnings);
  log_warnings(warnings);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  save_model(a.out, model);
  std::cout << "trained " << a.approach << " model from " << frames.size() << " events\n";
}

struct ClassifyArgs {
  fs::path model, input, out;
  bool timings = false;
};

void run_classify(const ClassifyArgs& a) {
  const auto model = load_model(a.model);
  const auto ev = load_events(a.input);
  if (ev.header.filtered != model.filtered())
    std::cerr << "warning: model and events disagree on filtering\n";
  auto out = open_out(a.out);
  const RecordOptions ro{a.timings};
  for (const auto& e : ev.events) {
    const auto r = classify(e.frame, model);
    log_warnings(r.warnings);
    out << result_record(e, r, ro).dump() << '\n';
  }
  std::cout << "classified " << ev.events.size() << " events\n";
}

struct EvalArgs {
  fs::path model, test, out, corpus;
};

void write_report(const fs::path& out_path, const std::vector<EvalReport>& reports) {
  auto out = open_out(out_path);
  for (const auto& r : reports) {
    out << to_json(r).dump() << '\n';
    std::cout << render_table(r) << '\n';
  }
}

void run_eval(const EvalArgs& a) {
  if (a.model.empty() || a.test.empty() || a.out.empty())
    throw ConfigError("eval needs --model, --test and --out");
  const auto model = load_model(a.model);
  const auto ev = load_events(a.test);
  DetectorConfig det;
  det.geometry = ev.header.geometry;
  det.rate_hz = ev.header.rate_hz;
  write_report(a.out, {evaluate(model, frames_of(ev.events), {}, det)});
}

void run_compare(const EvalArgs& a) {
  const auto train = load_labeled(a.corpus / "train.csv");
  const auto test = load_labeled(a.corpus / "test.csv");
  write_report(a.out, compare_arms(train, test));
}

struct ServeArgs {
  std::uint16_t port = 0;
  std::string host = "127.0.0.1";
  fs::path model, results;
  std::string filter;
  bool single_thread = false;
  bool timings = false;
  double max_seconds = 0.0;
  DetectorFlags det;
};

void run_serve(const ServeArgs& a) {
  auto model = load_model(a.model);
  PipelineConfig cfg;
  cfg.detector = a.det.config();
  const bool filtered = a.filter.empty() ? model.filtered() : kOnOff.at(a.filter);
  if (filtered != model.filtered()) std::cerr << "warning: model was trained with the other filter setting\n";
  if (filtered) cfg.filter = FilterSpec{};
  cfg.records.timings = a.timings;

  std::ofstream file;
  if (!a.results.empty()) {
    file.open(a.results, std::ios::app | std::ios::binary);
    if (!file) throw IoError("cannot open results file " + a.results.string());
  }
  std::ostream& sink = a.results.empty() ? std::cout : file;

  ServerOptions so;
  so.host = a.host;
  so.port = a.port;
  so.threaded = !a.single_thread;
  LiveServer server(std::move(model), cfg, so, [&](const std::string& r) {
    sink << r << '\n';
    sink.flush();
  });
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  std::cerr << "listening on " << a.host << ':' << server.port() << std::endl;
  const auto began = Clock::now();
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.max_seconds > 0.0 &&
        std::chrono::duration<double>(Clock::now() - began).count() > a.max_seconds)
      break;
  }
  server.stop();
  const auto s = server.stats();
  std::cerr << "received " << server.received() << ", accepted " << s.accepted << ", malformed "
            << s.malformed << ", out of order " << s.out_of_order << ", gaps " << s.gaps
            << " (" << s.missing_samples << " samples), queue drops " << s.queue_dropped
            << ", events " << s.events << ", max emit latency " << s.max_emit_latency_ms << " ms\n";
}

struct ReplayArgs {
  fs::path input;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

void run_replay(const ReplayArgs& a) {
  const auto rec = read_recording(a.input);
  const auto n = replay_udp(rec.stream, a.host, a.port);
  std::cout << "sent " << n << " datagrams\n";
}

std::uint16_t default_port() {
  if (const char* p = std::getenv("BUMPWATCH_PORT")) {
    const auto v = parse_number(p);
    if (v && *v >= 0 && *v <= 65535) return static_cast<std::uint16_t>(*v);
  }
  return 5005;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bumpwatch: impact detection and classification from IMU streams"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a labeled synthetic corpus");
  simulate->add_option("--segments", sim.segments, "'all' or a comma list such as F,FL,FLB");
  simulate->add_option("--per-segment", sim.per_segment, "training impacts per segment");
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--noise-minutes", sim.noise_minutes, "length of the noise-only recording");
  simulate->add_option("--out", sim.out, "output directory")->required();

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "detect events in a recording");
  extract->add_option("--input", ex.input)->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out)->required();
  extract->add_option("--filter", ex.filter)->transform(CLI::CheckedTransformer(kOnOff));
  ex.det.add_to(extract);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "build a template model from labeled events");
  train->add_option("--approach", tr.approach)->check(CLI::IsMember({"multi", "mean", "median"}));
  train->add_option("--filter", tr.filter)->transform(CLI::CheckedTransformer(kOnOff));
  train->add_option("--input", tr.input)->required()->check(CLI::ExistingFile);
  train->add_option("--out", tr.out)->required();
  train->add_option("--seed", tr.seed, "seed for template pruning");

  ClassifyArgs cl;
  auto* cls = app.add_subcommand("classify", "classify events against a model");
  cls->add_option("--model", cl.model)->required()->check(CLI::ExistingFile);
  cls->add_option("--input", cl.input)->required()->check(CLI::ExistingFile);
  cls->add_option("--out", cl.out)->required();
  cls->add_flag("--timings", cl.timings, "add per-event wall time to each record");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "confusion matrix and timing report");
  eval->add_option("--model", ev.model)->check(CLI::ExistingFile);
  eval->add_option("--test", ev.test)->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out);
  eval->require_subcommand(0, 1);
  EvalArgs cmp;
  auto* compare = eval->add_subcommand("compare", "all approaches, filtered and raw");
  compare->add_option("--corpus", cmp.corpus, "directory written by simulate")
      ->required()
      ->check(CLI::ExistingDirectory);
  compare->add_option("--out", cmp.out)->required();

  ServeArgs sv;
  sv.port = default_port();
  auto* serve = app.add_subcommand("serve", "live UDP listener");
  serve->add_option("--port", sv.port, "UDP port (default $BUMPWATCH_PORT or 5005)");
  serve->add_option("--host", sv.host);
  serve->add_option("--model", sv.model)->required()->check(CLI::ExistingFile);
  serve->add_option("--filter", sv.filter, "default: as trained")->check(CLI::IsMember({"on", "off"}));
  serve->add_option("--results", sv.results, "append records here instead of stdout");
  serve->add_flag("--single-thread", sv.single_thread, "read and analyse on one thread");
  serve->add_flag("--timings", sv.timings);
  serve->add_option("--max-seconds", sv.max_seconds, "stop after this long (0: until SIGINT)");
  sv.det.add_to(serve);

  ReplayArgs rp;
  rp.port = default_port();
  auto* replay = app.add_subcommand("replay", "send a recording as UDP datagrams");
  replay->add_option("--input", rp.input)->required()->check(CLI::ExistingFile);
  replay->add_option("--host", rp.host);
  replay->add_option("--port", rp.port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) run_simulate(sim);
    else if (*extract) run_extract(ex);
    else if (*train) run_train(tr);
    else if (*cls) run_classify(cl);
    else if (*compare) run_compare(cmp);
    else if (*eval) run_eval(ev);
    else if (*serve) run_serve(sv);
    else if (*replay) run_replay(rp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
