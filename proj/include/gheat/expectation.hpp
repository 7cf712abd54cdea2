#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gheat/integrals.hpp"
#include "gheat/noise.hpp"

namespace gheat::expectation {

using Functional = std::function<double(const noise::NoiseRealization&)>;

struct ScenarioStat {
    std::string id;
    double mean = 0.0;
    double stderr_ = 0.0;
    int realizations = 0;
};

struct ScenarioEnsemble {
    std::vector<ScenarioStat> scenarios;
    double upper_estimate = 0.0;
    double lower_estimate = 0.0;
    double upper_stderr = 0.0;
    double lower_stderr = 0.0;
};

// Upper/lower expectation envelope over the scenario dictionary.
ScenarioEnsemble envelope(const Functional& functional,
                          const integrals::EnsembleSpec& ensemble);

struct ScalingReport {
    bool homogeneous = true;    // upper(l f) == l upper(f) exactly
    bool subadditive = true;    // upper(f+g) <= upper(f)+upper(g)
    double upper_scaled = 0.0;
    double upper_base = 0.0;
};

ScalingReport envelope_scaling_check(const Functional& functional, double lambda,
                                     const integrals::EnsembleSpec& ensemble);

// G(a) = (sigma_hi^2 a^+ - sigma_lo^2 a^-)/2.
double g_function(const noise::SigmaBounds& bounds, double a);

struct PdeGrid1d {
    double half_width = 0.0;  // domain [-R, R]
    int nx = 0;
    double cfl = 0.9;         // fraction of the monotone dt limit
};

// Explicit monotone scheme for u_t = G(u_xx), u(0,.) = payoff; returns
// u(t_end, 0), the G-normal reference value E[payoff(X_{t_end})].
double solve_g_heat_pde(const std::function<double(double)>& payoff, double t_end,
                        const noise::SigmaBounds& bounds, const PdeGrid1d& grid);

}  // namespace gheat::expectation
