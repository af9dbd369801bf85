#include "onebit/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace onebit {

std::vector<double> normalized_errors(const std::vector<ChannelMatrix>& truth,
                                      const std::vector<ChannelMatrix>& estimates) {
  if (truth.size() != estimates.size()) throw std::invalid_argument("nmse: list lengths differ");
  if (truth.empty()) throw std::invalid_argument("nmse: empty lists");
  std::vector<double> out;
  out.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& h = truth[i];
    const auto& e = estimates[i];
    if (h.rows() != e.rows() || h.cols() != e.cols()) throw std::invalid_argument("nmse: shape mismatch");
    const double energy = h.squaredNorm();
    if (!(energy > 0)) throw std::invalid_argument("nmse: zero-norm ground truth at index " + std::to_string(i));
    out.push_back((h - e).squaredNorm() / energy);
  }
  return out;
}

double nmse_db(const std::vector<ChannelMatrix>& truth, const std::vector<ChannelMatrix>& estimates) {
  const auto r = normalized_errors(truth, estimates);
  double sum = 0.0;
  for (double v : r) sum += v;
  return 10.0 * std::log10(std::max(sum / static_cast<double>(r.size()), 1e-12));
}

const SweepEntry& SweepResult::at(std::size_t point, const std::string& method) const {
  const auto& e = points.at(point).entries;
  auto it = e.find(method);
  if (it == e.end()) throw std::out_of_range("SweepResult: no entry for method '" + method + "'");
  return it->second;
}

namespace {

SweepEntry summarize(const std::vector<double>& ratios) {
  SweepEntry e;
  e.samples = static_cast<int>(ratios.size());
  double mean = 0.0;
  for (double v : ratios) mean += v;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (double v : ratios) var += (v - mean) * (v - mean);
  var = ratios.size() > 1 ? var / static_cast<double>(ratios.size() - 1) : 0.0;
  e.nmse_db = 10.0 * std::log10(std::max(mean, 1e-12));
  e.degenerate = !std::isfinite(e.nmse_db);
  const double se = std::sqrt(var / static_cast<double>(ratios.size()));
  e.half_width_db = mean > 0 ? 10.0 / std::numbers::ln10 * 1.96 * se / mean : 0.0;
  return e;
}

// Non-finite numbers are written as JSON null.
double number_or_nan(const nlohmann::json& x) {
  return x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
}

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

SweepEntry evaluate_point(const ChannelEstimator& model, const PairedDataset& data, const IndexRange& range,
                          double snr_db, bool record_timing) {
  if (!model.ready()) throw std::invalid_argument("evaluate: model '" + model.name() + "' is not trained");
  if (range.size() < 1) throw std::invalid_argument("evaluate: empty evaluation range");
  std::vector<QuantizedObservation> ys;
  std::vector<ChannelMatrix> truth;
  for (int i = range.begin; i < range.end; ++i) {
    ys.push_back(data.observation(i, snr_db));
    truth.push_back(data.channels[i]);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = model.estimate_all(ys, data.pilots, snr_db);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  SweepEntry e = summarize(normalized_errors(truth, est));
  if (record_timing) e.runtime_ms = ms / static_cast<double>(ys.size());
  return e;
}

SweepResult sweep_snr(const std::vector<NamedEstimator>& models, const PairedDataset& data,
                      const std::vector<double>& snr_list, bool record_timing) {
  if (snr_list.empty()) throw std::invalid_argument("sweep_snr: empty SNR list");
  SweepResult r;
  r.axis = "snr_db";
  for (const auto& m : models) {
    if (m.model == nullptr) throw std::invalid_argument("sweep_snr: null model '" + m.name + "'");
    if (!m.model->ready()) throw std::invalid_argument("sweep_snr: model '" + m.name + "' is not trained");
    r.methods.push_back(m.name);
  }
  const IndexRange test = data.split().test;
  for (double snr : snr_list) {
    SweepPoint p;
    p.label = format_double(snr);
    p.snr_db = snr;
    p.antennas = data.system.antennas;
    p.pilot_length = data.system.pilot_length;
    for (const auto& m : models) p.entries[m.name] = evaluate_point(*m.model, data, test, snr, record_timing);
    r.points.push_back(std::move(p));
  }
  return r;
}

SweepResult sweep_size(const std::vector<SizeCell>& cells, const std::vector<std::string>& methods, double snr_db) {
  SweepResult r;
  r.axis = "size";
  r.methods = methods;
  for (const auto& c : cells) {
    SweepPoint p;
    p.label = "M" + std::to_string(c.antennas) + "_tau" + std::to_string(c.pilot_length);
    p.snr_db = snr_db;
    p.antennas = c.antennas;
    p.pilot_length = c.pilot_length;
    for (const auto& name : methods) {
      auto it = std::find_if(c.models.begin(), c.models.end(), [&](const NamedEstimator& m) { return m.name == name; });
      if (c.data == nullptr || it == c.models.end() || it->model == nullptr) {
        SweepEntry absent;
        absent.present = false;
        p.entries[name] = absent;
        continue;
      }
      p.entries[name] = evaluate_point(*it->model, *c.data, c.data->split().test, snr_db);
    }
    r.points.push_back(std::move(p));
  }
  return r;
}

BenchmarkResult benchmark_time(const ChannelEstimator& model, const PairedDataset& data, int repetitions,
                               double snr_db) {
  if (repetitions < 10) throw std::invalid_argument("benchmark_time: repetitions must be >= 10");
  const IndexRange test = data.split().test.size() > 0 ? data.split().test : IndexRange{0, data.size()};
  std::vector<QuantizedObservation> ys;
  for (int i = 0; i < std::min(test.size(), repetitions); ++i) ys.push_back(data.observation(test.begin + i, snr_db));
  constexpr int kWarmup = 5;
  volatile double sink = 0.0;
  for (int i = 0; i < kWarmup; ++i) sink = sink + model.estimate(ys[i % ys.size()], data.pilots, snr_db)(0, 0).real();
  std::vector<double> times;
  times.reserve(repetitions);
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const ChannelMatrix h = model.estimate(ys[i % ys.size()], data.pilots, snr_db);
    times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    sink = sink + h(0, 0).real();
  }
  BenchmarkResult b;
  b.repetitions = repetitions;
  b.min_ms = *std::min_element(times.begin(), times.end());
  double sum = 0.0;
  for (double t : times) sum += t;
  b.mean_ms = sum / repetitions;
  std::sort(times.begin(), times.end());
  b.median_ms = repetitions % 2 ? times[repetitions / 2] : 0.5 * (times[repetitions / 2 - 1] + times[repetitions / 2]);
  return b;
}

std::string SweepResult::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "onebit-sweep";
  j["version"] = 1;
  j["axis"] = axis;
  j["methods"] = methods;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    nlohmann::ordered_json jp;
    jp["label"] = p.label;
    jp["snr_db"] = p.snr_db;
    jp["antennas"] = p.antennas;
    jp["pilot_length"] = p.pilot_length;
    nlohmann::ordered_json je = nlohmann::ordered_json::object();
    for (const auto& [name, e] : p.entries) {
      nlohmann::ordered_json x;
      x["present"] = e.present;
      x["degenerate"] = e.degenerate;
      x["nmse_db"] = e.nmse_db;
      x["half_width_db"] = e.half_width_db;
      x["samples"] = e.samples;
      x["runtime_ms"] = e.runtime_ms;
      je[name] = x;
    }
    jp["entries"] = je;
    pts.push_back(jp);
  }
  j["points"] = pts;
  return j.dump(2) + "\n";
}

SweepResult SweepResult::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format") != "onebit-sweep" || j.at("version") != 1)
    throw std::runtime_error("sweep result: unsupported format or version");
  SweepResult r;
  r.axis = j.at("axis").get<std::string>();
  r.methods = j.at("methods").get<std::vector<std::string>>();
  for (const auto& jp : j.at("points")) {
    SweepPoint p;
    p.label = jp.at("label").get<std::string>();
    p.snr_db = jp.at("snr_db").get<double>();
    p.antennas = jp.at("antennas").get<int>();
    p.pilot_length = jp.at("pilot_length").get<int>();
    for (const auto& [name, x] : jp.at("entries").items()) {
      SweepEntry e;
      e.present = x.at("present").get<bool>();
      e.degenerate = x.at("degenerate").get<bool>();
      e.nmse_db = number_or_nan(x.at("nmse_db"));
      e.half_width_db = number_or_nan(x.at("half_width_db"));
      e.samples = x.at("samples").get<int>();
      e.runtime_ms = x.at("runtime_ms").get<double>();
      p.entries[name] = e;
    }
    r.points.push_back(std::move(p));
  }
  return r;
}

bool SweepResult::operator==(const SweepResult& o) const {
  if (axis != o.axis || methods != o.methods || points.size() != o.points.size()) return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& a = points[i];
    const auto& b = o.points[i];
    if (a.label != b.label || a.snr_db != b.snr_db || a.antennas != b.antennas || a.pilot_length != b.pilot_length ||
        a.entries.size() != b.entries.size())
      return false;
    for (const auto& [name, e] : a.entries) {
      auto it = b.entries.find(name);
      if (it == b.entries.end()) return false;
      const auto& f = it->second;
      if (e.present != f.present || e.degenerate != f.degenerate || !same_number(e.nmse_db, f.nmse_db) ||
          !same_number(e.half_width_db, f.half_width_db) || e.samples != f.samples || e.runtime_ms != f.runtime_ms)
        return false;
    }
  }
  return true;
}

std::string SweepResult::to_table() const {
  std::ostringstream os;
  os << (axis == "snr_db" ? "snr_db" : "cell");
  for (const auto& m : methods) os << '\t' << m << "_nmse_db\t" << m << "_ci95_db";
  os << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& p : points) {
    os << p.label;
    for (const auto& m : methods) {
      auto it = p.entries.find(m);
      if (it == p.entries.end() || !it->second.present) {
        os << "\tabsent\t-";
      } else if (it->second.degenerate) {
        os << "\tdegenerate\t-";
      } else {
        os << '\t' << it->second.nmse_db << '\t' << it->second.half_width_db;
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace onebit
