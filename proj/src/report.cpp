#include "storyarcs/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace storyarcs {

double HistogramSpec::lower_edge(std::size_t bin) const {
  const double lo = std::log10(low);
  const double hi = std::log10(high);
  return lo + (hi - lo) * static_cast<double>(bin) / static_cast<double>(bins);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

DownloadReport download_stats(std::span<const SignedMode> assignments,
                              std::span<const std::uint64_t> downloads, double min_fraction,
                              const HistogramSpec& histogram) {
  if (assignments.size() != downloads.size()) throw Error("every book needs a mode and a download count");
  if (histogram.bins == 0 || !(histogram.low > 0) || !(histogram.high > histogram.low)) {
    throw Error("invalid download histogram range");
  }
  std::map<SignedMode, std::vector<double>> groups;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    groups[assignments[i]].push_back(static_cast<double>(downloads[i]));
  }

  const double lo = std::log10(histogram.low);
  const double hi = std::log10(histogram.high);
  const double width = (hi - lo) / static_cast<double>(histogram.bins);

  DownloadReport report;
  report.corpus_size = assignments.size();
  report.min_fraction = min_fraction;
  for (auto& [mode, values] : groups) {
    ModeDownloadStats stats;
    stats.mode = mode;
    stats.members = values.size();
    stats.fraction = static_cast<double>(values.size()) / static_cast<double>(assignments.size());
    stats.mean_downloads = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    stats.histogram.assign(histogram.bins, 0);
    for (const double v : values) {
      if (v < histogram.low) {
        ++stats.below_range;
      } else if (v > histogram.high) {
        ++stats.above_range;
      } else {
        const auto bin = static_cast<std::size_t>((std::log10(v) - lo) / width);
        ++stats.histogram[std::min(bin, histogram.bins - 1)];
      }
    }
    stats.median_downloads = median(std::move(values));
    (stats.fraction >= min_fraction ? report.kept : report.dropped).push_back(std::move(stats));
  }
  return report;
}

}  // namespace storyarcs
