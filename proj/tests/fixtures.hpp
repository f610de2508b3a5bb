#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "iqp/credal.hpp"
#include "iqp/quantum.hpp"

namespace fixtures {

using iqp::Operator;
using iqp::QuantumSystem;
using iqp::StateVector;

inline StateVector basis(std::size_t m, std::size_t k) {
    StateVector v = StateVector::Zero(static_cast<Eigen::Index>(m));
    v[static_cast<Eigen::Index>(k)] = 1.0;
    return v;
}

inline StateVector plus() {
    StateVector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return v;
}

// Beam splitter: Hadamard, then free flight. m = 2, n = 3.
inline QuantumSystem hadamard_identity() {
    return QuantumSystem({"0", "1"}, 3, {iqp::gates::hadamard(), iqp::gates::identity(2)}, basis(2, 0));
}

// Mach-Zehnder: two Hadamards. m = 2, n = 3.
inline QuantumSystem mach_zehnder() {
    return QuantumSystem({"0", "1"}, 3, {iqp::gates::hadamard(), iqp::gates::hadamard()}, basis(2, 0));
}

// Identity evolution of the uniform superposition. m = 2, n = 2.
inline QuantumSystem uniform_identity() {
    return QuantumSystem({"0", "1"}, 2, {iqp::gates::identity(2)}, plus());
}

// Haar-ish random unitary from the QR of a complex Gaussian matrix.
inline Operator random_unitary(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Operator a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = {g(rng), g(rng)};
    Eigen::HouseholderQR<Operator> qr(a);
    return qr.householderQ();
}

inline StateVector random_state(std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    StateVector v(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = {g(rng), g(rng)};
    return v / v.norm();
}

inline QuantumSystem random_system(std::size_t m, std::size_t n, std::mt19937_64& rng) {
    std::vector<Operator> steps;
    for (std::size_t k = 0; k + 1 < n; ++k) steps.push_back(random_unitary(m, rng));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < m; ++i) labels.push_back(std::to_string(i));
    return QuantumSystem(labels, n, steps, random_state(m, rng));
}

inline iqp::Event random_event(std::size_t size, std::mt19937_64& rng) {
    iqp::Event e(size);
    for (std::size_t i = 0; i < size; ++i) e.set(i, (rng() & 1) != 0);
    return e;
}

inline iqp::TrajectoryMeasure random_measure(std::size_t size, std::mt19937_64& rng) {
    std::exponential_distribution<double> x;
    iqp::TrajectoryMeasure p{std::vector<double>(size)};
    double sum = 0.0;
    for (double& v : p.probs) sum += (v = x(rng));
    for (double& v : p.probs) v /= sum;
    return p;
}

// Random lower bounds P(A_i) >= f_i on a random space with m <= 3, n <= 3.
// With `feasible` the bounds sit below the values of a hidden measure;
// otherwise they are drawn freely and may or may not be consistent.
inline iqp::ConstraintSet random_constraints(std::mt19937_64& rng, bool feasible) {
    const std::size_t m = 1 + rng() % 3;
    const std::size_t n = 1 + rng() % 3;
    const iqp::TrajectorySpace space(m, n);
    iqp::ConstraintSet cs(space);
    const auto hidden = random_measure(space.size(), rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t k = (feasible ? 1 : 2) + rng() % 6;
    for (std::size_t i = 0; i < k; ++i) {
        iqp::Event a = random_event(space.size(), rng);
        if (!feasible) a = a & random_event(space.size(), rng);  // sparser events clash more often
        if (a.empty()) a.set(rng() % space.size(), true);
        const double rhs = feasible ? iqp::event_probability(hidden, a) * u(rng) : 0.3 + 0.7 * u(rng);
        cs.add({a, iqp::lp::Relation::GreaterEq, rhs, {}});
    }
    return cs;
}

}  // namespace fixtures
