#pragma once

#include <string>
#include <vector>

namespace entstop {

// Outcome of one grid-based property check on the driver functions.
struct PropertyResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;  // worst observed margin (negative = violation)
    std::string detail;
};

PropertyResult check_phi_lipschitz();
PropertyResult check_phi_n_slope_bound();
PropertyResult check_phi_n_monotone_in_n();
PropertyResult check_psi_is_cdf();
PropertyResult check_penalization_gap();
PropertyResult check_ratio_monotonicity();
PropertyResult check_root_ordering();
PropertyResult check_truncation_derivative_bound();
PropertyResult check_two_route_consistency();

// All of the above, in a fixed order.
std::vector<PropertyResult> run_driver_properties();

}  // namespace entstop
