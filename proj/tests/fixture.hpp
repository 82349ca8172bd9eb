#pragma once

#include "nlspde/integrator.hpp"
#include "nlspde/spectral.hpp"

namespace fixture {

/// Owns everything a Simulation refers to.
struct Setup {
  nlspde::ProblemSpec spec;
  nlspde::StepperConfig stepper;
  nlspde::Grid grid;
  nlspde::DiscreteOperator op;
  nlspde::EigenPair eigen;
  nlspde::NoiseModel noise;

  explicit Setup(nlspde::ProblemSpec s, nlspde::StepperConfig st = {}, nlspde::NoiseModel n = {})
      : spec(std::move(s)),
        stepper(st),
        grid(nlspde::build_grid(spec.domain)),
        op(nlspde::assemble_laplacian(grid)),
        eigen(nlspde::principal_eigenpair(op, grid)),
        noise(std::move(n)) {}

  nlspde::Simulation sim() const { return {spec, stepper, grid, op, eigen, noise}; }
};

inline nlspde::ProblemSpec line_problem(int nodes, double lambda, double horizon) {
  nlspde::ProblemSpec s;
  s.domain = {1, {1.0}, {nodes}};
  s.lambda = lambda;
  s.horizon = horizon;
  return s;
}

}  // namespace fixture
