#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "neardgd/dynamics.hpp"

namespace neardgd {

inline constexpr const char* kTrajectoryHeader =
    "k,t_k,A_k,B_k,regret,ergodic_gap,cum_comm,cum_grad,cum_cost,bound_eq_5_24,bound_eq_5_40";

// One row per trajectory point; cost[m] must cover every row index. Bound
// cells are left empty when the row carries no value.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory,
                          const std::vector<double>& cost);
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& trajectory,
                          const std::vector<double>& cost);

}  // namespace neardgd
