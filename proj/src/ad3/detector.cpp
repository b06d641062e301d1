#include "uaplab/ad3/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uaplab::ad3 {
namespace {

constexpr const char* kHeader = "# uaplab-ad3 v1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void DetectorConfig::validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid detector config: " + what);
  };
  if (k1 == 0 || k2 == 0 || t1 == 0 || t2 == 0) fail("k1, k2, t1 and t2 must be >= 1");
  if (!(p > 0.0 && p <= 100.0)) fail("p must be in (0, 100]");
  if (!(r > 0.0 && r <= 1.0)) fail("r must be in (0, 1]");
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) fail("smoothing must be positive");
}

DetectorConfig DetectorConfig::scaled_to(std::size_t horizon, std::size_t reference_length) const {
  if (horizon == 0 || reference_length == 0) throw std::invalid_argument("scaling needs positive lengths");
  const double f = static_cast<double>(horizon) / static_cast<double>(reference_length);
  DetectorConfig out = *this;
  out.t1 = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(t1) * f)));
  out.t2 = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(t2) * f)));
  return out;
}

std::size_t DetectorConfig::required_exceedances() const {
  // The small slack keeps r * t2 = 36.000000000000004 from demanding 37.
  return static_cast<std::size_t>(std::ceil(r * static_cast<double>(t2) - 1e-9));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> episode_scores(const Capd& learned, std::span<const std::size_t> actions,
                                   std::size_t t1) {
  Capd current(learned.actions(), learned.smoothing());
  std::vector<double> scores;
  for (std::size_t t = 1; t <= actions.size(); ++t) {
    if (t >= 2) current.add(actions[t - 2], actions[t - 1]);
    if (t > t1) scores.push_back(capd_divergence(current, learned));
  }
  return scores;
}

DetectorModel calibrate(const Capd& learned, std::span<const env::EpisodeTrace> traces,
                        const DetectorConfig& cfg) {
  cfg.validate();
  std::vector<double> pooled;
  for (const auto& t : traces) {
    const auto s = episode_scores(learned, t.actions, cfg.t1);
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  if (pooled.empty()) {
    throw std::invalid_argument("calibration traces are all no longer than t1 = " + std::to_string(cfg.t1));
  }
  return DetectorModel{learned, percentile(std::move(pooled), cfg.p), cfg};
}

DetectorModel fit_detector(std::span<const env::EpisodeTrace> learning,
                           std::span<const env::EpisodeTrace> calibration, std::size_t actions,
                           const DetectorConfig& cfg) {
  cfg.validate();
  return calibrate(learn_capd(learning, actions, cfg.smoothing), calibration, cfg);
}

ExceedanceWindow::ExceedanceWindow(std::size_t length, std::size_t required)
    : length_(length), required_(required) {
  if (length == 0) throw std::invalid_argument("exceedance window needs length >= 1");
}

bool ExceedanceWindow::push(bool exceeds) {
  window_.push_back(exceeds);
  count_ += exceeds ? 1 : 0;
  if (window_.size() > length_) {
    count_ -= window_.front() ? 1 : 0;
    window_.pop_front();
  }
  return count_ >= required_;
}

Monitor::Monitor(const DetectorModel& model)
    : model_((model.cfg.validate(), model)),
      current_(model.learned.actions(), model.learned.smoothing()),
      window_(model.cfg.t2, model.cfg.required_exceedances()) {}

std::optional<std::size_t> Monitor::push(std::size_t action) {
  ++step_;
  if (previous_) current_.add(*previous_, action);
  else if (action >= current_.actions()) throw std::out_of_range("action outside the detector's action set");
  previous_ = action;
  if (step_ <= model_.cfg.t1) return alarm_;

  const double score = capd_divergence(current_, model_.learned);
  last_score_ = score;
  if (window_.push(score > model_.threshold) && !alarm_) alarm_ = step_;
  return alarm_;
}

std::optional<std::size_t> monitor(const DetectorModel& model, std::span<const std::size_t> actions) {
  Monitor m(model);
  for (std::size_t a : actions) m.push(a);
  return m.alarm();
}

void write_model(std::ostream& out, const DetectorModel& model) {
  const auto& c = model.cfg;
  const auto& capd = model.learned;
  out << kHeader << '\n'
      << "actions " << capd.actions() << '\n'
      << "smoothing " << fmt(capd.smoothing()) << '\n'
      << "threshold " << fmt(model.threshold) << '\n'
      << "k1 " << c.k1 << '\n'
      << "k2 " << c.k2 << '\n'
      << "p " << fmt(c.p) << '\n'
      << "r " << fmt(c.r) << '\n'
      << "t1 " << c.t1 << '\n'
      << "t2 " << c.t2 << '\n'
      << "counts\n";
  for (std::size_t p = 0; p < capd.actions(); ++p) {
    for (std::size_t n = 0; n < capd.actions(); ++n) out << (n ? " " : "") << fmt(capd.count(p, n));
    out << '\n';
  }
}

DetectorModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("not a detector model file");
  const auto field = [&in](const std::string& key) {
    std::string name;
    std::string value;
    if (!(in >> name >> value) || name != key) throw std::runtime_error("detector model: expected '" + key + "'");
    return value;
  };
  const auto actions = std::stoul(field("actions"));
  const double smoothing = std::stod(field("smoothing"));
  DetectorModel model;
  model.threshold = std::stod(field("threshold"));
  model.cfg.k1 = std::stoul(field("k1"));
  model.cfg.k2 = std::stoul(field("k2"));
  model.cfg.p = std::stod(field("p"));
  model.cfg.r = std::stod(field("r"));
  model.cfg.t1 = std::stoul(field("t1"));
  model.cfg.t2 = std::stoul(field("t2"));
  model.cfg.smoothing = smoothing;
  std::string tag;
  if (!(in >> tag) || tag != "counts") throw std::runtime_error("detector model: expected 'counts'");
  std::vector<double> counts(actions * actions);
  for (double& c : counts) {
    std::string v;
    if (!(in >> v)) throw std::runtime_error("detector model: truncated count table");
    c = std::stod(v);
  }
  model.learned = Capd(actions, smoothing, std::move(counts));
  model.cfg.validate();
  if (!(model.threshold >= 0.0)) throw std::runtime_error("detector model: negative threshold");
  return model;
}

void save_model(const std::filesystem::path& path, const DetectorModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

DetectorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace uaplab::ad3
