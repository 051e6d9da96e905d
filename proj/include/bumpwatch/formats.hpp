#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bumpwatch/classifier.hpp"
#include "bumpwatch/detector.hpp"
#include "bumpwatch/templates.hpp"

namespace bumpwatch {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

// ---- Events files: a header line, then one frame per line -----------------------

struct EventsHeader {
  bool filtered = false;
  double rate_hz = 100.0;
  FrameGeometry geometry{};
};

struct EventsFile {
  EventsHeader header;
  std::vector<DetectionEvent> events;
};

inline json to_json(const DetectionEvent& e) {
  json j;
  j["entry_index"] = e.entry_index;
  j["entry_t_ms"] = e.entry_t_ms;
  j["t_start"] = e.frame.t_start;
  j["peak_index"] = e.frame.peak_index;
  j["padded"] = e.frame.padded;
  j["label"] = e.frame.label ? json(std::string(segment_name(*e.frame.label))) : json(nullptr);
  for (Channel c : kAllChannels) j[std::string(channel_name(c))] = e.frame.channels[index_of(c)];
  return j;
}

inline DetectionEvent event_from_json(const json& j) {
  DetectionEvent e;
  e.entry_index = j.at("entry_index").get<std::size_t>();
  e.entry_t_ms = j.at("entry_t_ms").get<double>();
  e.frame.t_start = j.at("t_start").get<double>();
  e.frame.peak_index = j.at("peak_index").get<std::size_t>();
  e.frame.padded = j.value("padded", false);
  if (j.contains("label") && !j["label"].is_null())
    e.frame.label = parse_segment(j["label"].get<std::string>());
  for (Channel c : kAllChannels)
    e.frame.channels[index_of(c)] = j.at(std::string(channel_name(c))).get<std::vector<double>>();
  if (!e.frame.well_formed()) throw InputError("event frame channels differ in length");
  return e;
}

inline void write_events(std::ostream& os, const EventsFile& f) {
  json h;
  h["format"] = "bumpwatch-events";
  h["version"] = kFormatVersion;
  h["filter"] = f.header.filtered ? "on" : "off";
  h["rate_hz"] = f.header.rate_hz;
  h["frame_len"] = f.header.geometry.frame_len;
  h["padding"] = f.header.geometry.padding;
  os << h.dump() << '\n';
  for (const auto& e : f.events) os << to_json(e).dump() << '\n';
}

inline EventsFile read_events(std::istream& is) {
  EventsFile f;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ParseError(ex.what(), lineno);
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != "bumpwatch-events")
          throw ParseError("not a bumpwatch events file", lineno);
        if (j.value("version", 0) != kFormatVersion)
          throw ParseError("unsupported events file version", lineno);
        f.header.filtered = j.at("filter").get<std::string>() == "on";
        f.header.rate_hz = j.at("rate_hz").get<double>();
        f.header.geometry = {j.at("frame_len").get<std::size_t>(), j.at("padding").get<std::size_t>()};
        have_header = true;
        continue;
      }
      f.events.push_back(event_from_json(j));
    } catch (const json::exception& ex) {
      throw ParseError(ex.what(), lineno);
    }
  }
  if (!have_header) throw ParseError("missing events header", lineno);
  return f;
}

inline std::vector<EventFrame> frames_of(const std::vector<DetectionEvent>& events) {
  std::vector<EventFrame> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.frame);
  return out;
}

// ---- Model files ---------------------------------------------------------------------

inline json to_json(const SegmentModel& m) {
  json j;
  j["format"] = "bumpwatch-model";
  j["version"] = kFormatVersion;
  j["approach"] = approach_name(m.approach());
  j["filter"] = m.filtered() ? "on" : "off";
  j["frame_len"] = m.frame_len();
  json chs = json::array();
  for (Channel c : m.channels()) chs.push_back(channel_name(c));
  j["channels"] = chs;
  json segs = json::object();
  for (const auto& sc : segment_catalog()) {
    json per = json::object();
    for (Channel c : m.channels()) {
      json list = json::array();
      for (const auto& t : m.templates(sc.id, c))
        list.push_back({{"provenance", t.provenance}, {"values", t.values}});
      per[std::string(channel_name(c))] = list;
    }
    segs[std::string(segment_name(sc.id))] = per;
  }
  j["segments"] = segs;
  return j;
}

inline SegmentModel model_from_json(const json& j) {
  if (j.value("format", "") != "bumpwatch-model") throw InputError("not a bumpwatch model");
  if (j.value("version", 0) != kFormatVersion) throw InputError("unsupported model version");
  SegmentModel m(parse_approach(j.at("approach").get<std::string>()),
                 j.at("filter").get<std::string>() == "on", j.at("frame_len").get<std::size_t>());
  const auto& segs = j.at("segments");
  for (const auto& sc : segment_catalog()) {
    const auto& per = segs.at(std::string(segment_name(sc.id)));
    for (Channel c : m.channels()) {
      auto& slot = m.slot(sc.id, c);
      for (const auto& t : per.at(std::string(channel_name(c)))) {
        Template tpl{sc.id, c, t.at("values").get<std::vector<double>>(),
                     t.at("provenance").get<std::string>()};
        if (tpl.values.size() != m.frame_len()) throw InputError("template length mismatch");
        slot.push_back(std::move(tpl));
      }
      if (slot.empty()) throw InputError("model lacks templates for a segment");
    }
  }
  return m;
}

inline void save_model(const std::filesystem::path& path, const SegmentModel& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(m).dump(1) << '\n';
}

inline SegmentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  try {
    return model_from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw InputError(std::string("model file: ") + ex.what());
  }
}

// ---- Result records --------------------------------------------------------------

struct RecordOptions {
  // Wall time is the only non-deterministic field, so it is opt-in.
  bool timings = false;
};

inline json result_record(const DetectionEvent& e, const ClassificationResult& r,
                          const RecordOptions& opt = {}) {
  json j;
  j["entry_index"] = e.entry_index;
  j["entry_t_ms"] = e.entry_t_ms;
  j["approach"] = approach_name(r.approach);
  j["winner"] = segment_name(r.winner);
  if (e.frame.label) j["label"] = segment_name(*e.frame.label);
  if (e.frame.padded) j["padded"] = true;
  json chs = json::array();
  for (Channel c : r.channels) chs.push_back(channel_name(c));
  j["channels"] = chs;
  json norms = json::object(), ratios = json::object();
  for (const auto& sc : segment_catalog()) {
    norms[std::string(segment_name(sc.id))] = r.norms[index_of(sc.id)];
    ratios[std::string(segment_name(sc.id))] = r.ratios[index_of(sc.id)];
  }
  j["norms"] = norms;
  j["ratios"] = ratios;
  if (opt.timings) j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

}  // namespace bumpwatch
