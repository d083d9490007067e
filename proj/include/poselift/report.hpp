#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "poselift/metrics.hpp"

namespace poselift {

namespace detail {

inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

// Two-row error table in the comparison layout: one column per action plus a
// trailing Avg column. The better (lower) cell of each action column is
// bolded. The Avg cell is the mean of the row's rounded action cells, printed
// at two decimals so it can be checked against the cells it summarizes.
inline std::string markdown_error_table(const std::string& title,
                                        const std::vector<std::string>& actions,
                                        const std::string& label_a,
                                        const std::vector<std::optional<double>>& row_a,
                                        const std::string& label_b,
                                        const std::vector<std::optional<double>>& row_b,
                                        int decimals) {
  std::ostringstream os;
  os << "### " << title << "\n\n";
  os << "| Model |";
  for (const std::string& a : actions) os << " " << a << " |";
  os << " Avg |\n|---|";
  for (std::size_t i = 0; i <= actions.size(); ++i) os << "---|";
  os << "\n";

  const auto emit_row = [&](const std::string& label, const std::vector<std::optional<double>>& row,
                            const std::vector<std::optional<double>>& other) {
    os << "| " << label << " |";
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (!row[i]) {
        os << " — |";
        continue;
      }
      const double rounded = detail::round_to(*row[i], decimals);
      sum += rounded;
      ++n;
      const bool better = other[i] ? (*row[i] < *other[i]) : false;
      if (better) {
        os << " **" << detail::fixed(*row[i], decimals) << "** |";
      } else {
        os << " " << detail::fixed(*row[i], decimals) << " |";
      }
    }
    os << " " << (n ? detail::fixed(sum / static_cast<double>(n), 2) : "—") << " |\n";
  };

  emit_row(label_a, row_a, row_b);
  emit_row(label_b, row_b, row_a);
  os << "\n";
  return os.str();
}

// Efficiency block for one protocol: half/final errors and per-second rates
// for two runs sharing an epoch grid. Seconds are displayed whole; the rates
// use the exact fractional values.
inline std::string tpr_block(const std::string& protocol, const std::string& label_a,
                             const std::string& label_b, double eps_half_a, double eps_half_b,
                             double eps_final_a, double eps_final_b, double seconds_a,
                             double seconds_b, double k) {
  const double eps0 = epsilon0(eps_half_a, eps_half_b, k);
  const double theta_a = tpr(eps0, eps_final_a, seconds_a);
  const double theta_b = tpr(eps0, eps_final_b, seconds_b);
  char buf[64];
  std::ostringstream os;
  os << "### " << protocol << " efficiency (k = " << detail::fixed(k, 2) << ")\n\n";
  os << "| Object | " << label_a << " | " << label_b << " |\n|---|---|---|\n";
  os << "| TC (half) | " << detail::fixed(seconds_a / 2.0, 0) << " sec. | "
     << detail::fixed(seconds_b / 2.0, 0) << " sec. |\n";
  os << "| error (half) | " << detail::fixed(eps_half_a, 2) << " | " << detail::fixed(eps_half_b, 2)
     << " |\n";
  os << "| TC (full) | " << detail::fixed(seconds_a, 0) << " sec. | " << detail::fixed(seconds_b, 0)
     << " sec. |\n";
  os << "| error (full) | " << detail::fixed(eps_final_a, 2) << " | " << detail::fixed(eps_final_b, 2)
     << " |\n";
  os << "| eps0 | " << detail::fixed(eps0, 3) << " | |\n";
  std::snprintf(buf, sizeof(buf), "%.3e", theta_a);
  os << "| TPR | " << buf << " | ";
  std::snprintf(buf, sizeof(buf), "%.3e", theta_b);
  os << buf << " |\n\n";
  return os.str();
}

}  // namespace poselift
