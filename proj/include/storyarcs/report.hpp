#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "storyarcs/modes.hpp"

namespace storyarcs {

// Equal-width bins in log10(downloads).
struct HistogramSpec {
  double low = 20.0;
  double high = 30'000.0;
  std::size_t bins = 30;

  double lower_edge(std::size_t bin) const;  // log10 units
};

struct ModeDownloadStats {
  SignedMode mode;
  std::size_t members = 0;
  double fraction = 0.0;
  double median_downloads = 0.0;
  double mean_downloads = 0.0;
  std::vector<std::size_t> histogram;
  std::size_t below_range = 0;
  std::size_t above_range = 0;
};

struct DownloadReport {
  std::size_t corpus_size = 0;
  double min_fraction = 0.0;
  std::vector<ModeDownloadStats> kept;     // members / corpus >= min_fraction
  std::vector<ModeDownloadStats> dropped;  // the remaining groups
};

// Groups books by signed mode, in (mode, +/-) order.
DownloadReport download_stats(std::span<const SignedMode> assignments,
                              std::span<const std::uint64_t> downloads, double min_fraction,
                              const HistogramSpec& histogram = {});

double median(std::vector<double> values);

}  // namespace storyarcs
