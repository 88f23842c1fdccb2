#include "degenlab/lab.hpp"

namespace degenlab {

const std::vector<Scenario>& packaged_scenarios() {
    static const std::vector<Scenario> list{
        {"degenerate-sweep", "c_delta sweep on [-1,1]: leakage vanishes for delta >= 1/2 while the Riemannian distance stays finite",
         R"(scenario: degenerate-sweep
description: >-
  Coefficient (x^2/(1+x^2))^delta on [-1, 1] for delta in {0.25, 0.5, 0.75}.
  For delta >= 1/2 the half line x < 0 is invariant under the heat flow and its
  set distance to the complement is infinite; the Riemannian distance between
  {x < 0} and {x > 1/2} is finite for every delta.
seed: 1
fields:
  - {name: delta-0.25, kind: degenerate, delta: 0.25, domain: [-1, 1]}
  - {name: delta-0.5, kind: degenerate, delta: 0.5, domain: [-1, 1]}
  - {name: delta-0.75, kind: degenerate, delta: 0.75, domain: [-1, 1]}
grid: {n: 256}
boundary: neumann
eps: [0]
sets:
  left: [[-1, 0]]
  far_right: [[0.5, 1]]
audits:
  - {kind: separation, sets: left}
  - {kind: distance, mode: riemannian, sets: [left, far_right], finite: true}
  - {kind: refinement, observable: leakage, sets: left, t: 0.1, sizes: [128, 256, 512], max_relative_change: 0.05}
  - {kind: refinement, observable: riemannian, sets: [left, far_right], sizes: [128, 256, 512]}
)"},
        {"laplacian-interval", "unit coefficient on [0,1]: set distance equals the Euclidean gap, Gaussian bound holds",
         R"(scenario: laplacian-interval
description: >-
  Neumann Laplacian on [0, 1] with A = [0, 0.2] and B = [0.8, 1]. The set
  distance is the Euclidean gap 0.6 and the heat cross term obeys the Gaussian
  off-diagonal bound at every dyadic time.
seed: 2
field: {kind: constant, value: 1, domain: [0, 1]}
grid: {n: 1024}
boundary: neumann
sets:
  A: [[0, 0.2]]
  B: [[0.8, 1]]
times: [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625]
audits:
  - {kind: distance, mode: d, sets: [A, B], expect: 0.6, tolerance_cells: 2}
  - {kind: gaussian, sets: [A, B]}
  - {kind: rho, sets: [A, B], t: 0.05}
  - {kind: refinement, observable: distance, sets: [A, B], sizes: [160, 320, 640, 1280], target: 0.6, min_order: 0.9}
)"},
        {"dirichlet-d1-gap", "Dirichlet interval: d = b - a while the boundary-anchored d1 collapses to zero",
         R"(scenario: dirichlet-d1-gap
description: >-
  Dirichlet Laplacian on (0, 1) with A = (0, 0.3) and B = (0.7, 1). The set
  distance is b - a = 0.4, whereas the variant that lets test functions reach
  the boundary vanishes up to grid resolution.
seed: 3
field: {kind: constant, value: 1, domain: [0, 1]}
grid: {n: 1024}
boundary: dirichlet
sets:
  A: [[0, 0.3]]
  B: [[0.7, 1]]
times: [0.1, 0.05, 0.025]
audits:
  - {kind: distance, mode: d, sets: [A, B], expect: 0.4, tolerance_cells: 4}
  - {kind: distance, mode: d1, sets: [A, B], at_most_cells: 4}
  - {kind: gaussian, sets: [A, B]}
)"},
        {"neumann-vs-dirichlet", "distance ordering between boundary conditions for interior sets",
         R"(scenario: neumann-vs-dirichlet
description: >-
  Coefficient 2 + sin(2 pi x) on [0, 1]. For interior sets the set distance does
  not depend on the boundary condition, and the boundary-anchored distance
  under Dirichlet conditions never exceeds it.
seed: 4
field: {kind: sinusoid, mean: 2, amplitude: 1, frequency: 1, phase: 0, domain: [0, 1]}
grid: {n: 512}
boundary: dirichlet
sets:
  A: [[0.1, 0.3]]
  B: [[0.6, 0.9]]
audits:
  - {kind: boundary_ordering, sets: [A, B]}
  - {kind: distance, mode: d, sets: [A, B]}
  - {kind: distance, mode: d1, sets: [A, B]}
)"},
        {"viscosity-limit", "resolvents of the eps-regularised forms converge to the harmonic-limit solve",
         R"(scenario: viscosity-limit
description: >-
  Coefficient c_delta with delta = 0.75 on [-1, 1]. Resolvents of the forms
  regularised by eps times the Dirichlet integral form a Cauchy sequence as eps
  decreases and approach the eps = 0 block solve; form values on a fixed test
  vector decrease with eps.
seed: 5
field: {kind: degenerate, delta: 0.75, domain: [-1, 1]}
grid: {n: 512}
boundary: neumann
audits:
  - {kind: viscosity, lambda: 1, eps: [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]}
)"},
        {"wave-speed", "finite propagation speed of cos(t H^{1/2}) between sets at distance 0.6",
         R"(scenario: wave-speed
description: >-
  Unit coefficient on [0, 1] with A = [0, 0.2] and B = [0.8, 1]. The wave cross
  term stays at round-off level while |t| is below the set distance.
seed: 6
field: {kind: constant, value: 1, domain: [0, 1]}
grid: {n: 2048}
boundary: neumann
sets:
  A: [[0, 0.2]]
  B: [[0.8, 1]]
wave_constant: 1e-5
audits:
  - {kind: wave, sets: [A, B], times: {start: 0, stop: 0.8, step: 0.01}}
)"},
        {"twist-certified", "exponentially twisted heat semigroups against the certified growth rate",
         R"(scenario: twist-certified
description: >-
  Coefficient 2 + sin(2 pi x) on [0, 1]. Random smooth weights psi with sup norm
  at most one: the twisted semigroup norm is bounded by exp(omega(psi) t), and
  the multiplier bound holds for random test vectors.
seed: 7
field: {kind: sinusoid, mean: 2, amplitude: 1, frequency: 1, phase: 0, domain: [0, 1]}
grid: {n: 256}
boundary: neumann
times: [0.01, 0.1, 1]
audits:
  - {kind: twist, samples: 20, amplitude: 1}
  - {kind: multiplier, samples: 10, amplitude: 1}
)"},
    };
    return list;
}

const Scenario* find_scenario(const std::string& name) {
    for (const Scenario& s : packaged_scenarios())
        if (s.name == name) return &s;
    return nullptr;
}

}  // namespace degenlab
