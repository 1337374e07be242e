#include "neardgd/csv.hpp"

#include <fstream>
#include <stdexcept>

#include "neardgd/format.hpp"

namespace neardgd {

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory,
                          const std::vector<double>& cost) {
  if (cost.size() < trajectory.size())
    throw std::invalid_argument("write_trajectory_csv: cost series shorter than trajectory");
  os << kTrajectoryHeader << "\n";
  for (std::size_t m = 0; m < trajectory.size(); ++m) {
    const TrajectoryPoint& row = trajectory[m];
    os << row.k << ',' << row.t_k << ',' << format_double(row.A) << ',' << format_double(row.B)
       << ',' << format_double(row.regret) << ',' << format_double(row.ergodic_gap) << ','
       << row.cum_comm << ',' << row.cum_grad << ',' << format_double(cost[m]) << ',';
    if (row.bound_fixed) os << format_double(*row.bound_fixed);
    os << ',';
    if (row.bound_nondecreasing) os << format_double(*row.bound_nondecreasing);
    os << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& trajectory,
                          const std::vector<double>& cost) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  write_trajectory_csv(os, trajectory, cost);
}

}  // namespace neardgd
