#include "artkit/aggregate.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace artkit {

Rate wald_rate(std::size_t successes, std::size_t total) {
  Rate r{successes, total, 0.0, 0.0};
  if (total == 0) return r;
  const double n = static_cast<double>(total);
  r.rate = static_cast<double>(successes) / n;
  r.half_width = 1.96 * std::sqrt(r.rate * (1.0 - r.rate) / n);
  return r;
}

namespace {

class Accumulator {
 public:
  void add(double v) { values_.push_back(v); }
  MeanSd result() const {
    MeanSd m;
    m.count = values_.size();
    if (values_.empty()) return m;
    double sum = 0.0;
    for (double v : values_) sum += v;
    m.mean = sum / static_cast<double>(m.count);
    double ss = 0.0;
    for (double v : values_) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(m.count));
    return m;
  }

 private:
  std::vector<double> values_;
};

}  // namespace

AggregateStats aggregate(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw EvalError("cannot aggregate zero reports");
  AggregateStats s;
  s.objects = reports.size();
  std::size_t link_ok = 0, joint_ok = 0;
  Accumulator pos, orient, axis, origin, range, dir, cham;
  for (const auto& r : reports) {
    if (r.object_link_success) ++link_ok;
    if (r.object_joint_success) ++joint_ok;
    const FailureKind f = r.failure();
    if (f != FailureKind::none) ++s.failure_counts[to_string(f)];
    for (const auto& l : r.links) {
      if (l.error) {
        pos.add(l.error->position_error);
        orient.add(l.error->orientation_error);
      }
      if (l.chamfer) cham.add(*l.chamfer);
    }
    for (const auto& j : r.joints) {
      if (!j.error || j.error->type_error != 0) continue;
      axis.add(j.error->axis_error);
      origin.add(j.error->origin_error);
      range.add(j.error->limit_range_error);
      dir.add(j.error->limit_direction_error);
    }
  }
  s.link_success = wald_rate(link_ok, reports.size());
  s.joint_success = wald_rate(joint_ok, reports.size());
  for (const auto& [kind, count] : s.failure_counts) {
    s.failure_percent[kind] = 100.0 * static_cast<double>(count) / static_cast<double>(reports.size());
  }
  s.position_error = pos.result();
  s.orientation_error = orient.result();
  s.axis_error = axis.result();
  s.origin_error = origin.result();
  s.limit_range_error = range.result();
  s.limit_direction_error = dir.result();
  s.chamfer = cham.result();
  return s;
}

namespace {

nlohmann::json rate_json(const Rate& r) {
  return {{"successes", r.successes}, {"total", r.total}, {"rate", r.rate}, {"ci95_half_width", r.half_width}};
}

nlohmann::json mean_sd_json(const MeanSd& m) { return {{"count", m.count}, {"mean", m.mean}, {"sd", m.sd}}; }

}  // namespace

std::string stats_to_json(const AggregateStats& s) {
  nlohmann::json doc;
  doc["schema"] = "artkit.aggregate/1";
  doc["objects"] = s.objects;
  doc["link_success"] = rate_json(s.link_success);
  doc["joint_success"] = rate_json(s.joint_success);
  doc["failure_counts"] = s.failure_counts;
  doc["failure_percent"] = s.failure_percent;
  doc["errors"] = {{"position", mean_sd_json(s.position_error)},
                   {"orientation", mean_sd_json(s.orientation_error)},
                   {"axis", mean_sd_json(s.axis_error)},
                   {"origin", mean_sd_json(s.origin_error)},
                   {"limit_range", mean_sd_json(s.limit_range_error)},
                   {"limit_direction", mean_sd_json(s.limit_direction_error)},
                   {"chamfer", mean_sd_json(s.chamfer)}};
  return doc.dump(2) + "\n";
}

std::string stats_to_text(const AggregateStats& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  auto rate = [&](const char* label, const Rate& r) {
    out << label << ": " << 100.0 * r.rate << "% +/- " << 100.0 * r.half_width << "% (" << r.successes << '/'
        << r.total << ")\n";
  };
  out << "objects: " << s.objects << '\n';
  rate("link success", s.link_success);
  rate("joint success", s.joint_success);
  out << "failure breakdown (% of objects):\n";
  if (s.failure_percent.empty()) out << "  none\n";
  for (const auto& [kind, pct] : s.failure_percent) {
    out << "  " << kind << ": " << pct << "% (" << s.failure_counts.at(kind) << ")\n";
  }
  out << std::setprecision(4) << "errors (mean +/- sd):\n";
  auto row = [&](const char* label, const MeanSd& m, const char* unit) {
    out << "  " << label << ": " << m.mean << " +/- " << m.sd << ' ' << unit << " (n=" << m.count << ")\n";
  };
  row("position", s.position_error, "m");
  row("orientation", s.orientation_error, "rad");
  row("axis", s.axis_error, "rad");
  row("origin", s.origin_error, "m");
  row("limit range", s.limit_range_error, "");
  row("limit direction", s.limit_direction_error, "");
  row("chamfer", s.chamfer, "m");
  return out.str();
}

ConfusionMatrix critic_agreement(const std::vector<bool>& critic, const std::vector<bool>& gt) {
  if (critic.size() != gt.size()) {
    throw EvalError("verdict lists differ in length: " + std::to_string(critic.size()) + " vs " +
                    std::to_string(gt.size()));
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < critic.size(); ++i) {
    if (critic[i] && gt[i]) ++m.tp;
    else if (critic[i]) ++m.fp;
    else if (gt[i]) ++m.fn;
    else ++m.tn;
  }
  if (!critic.empty()) m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(critic.size());
  return m;
}

}  // namespace artkit
