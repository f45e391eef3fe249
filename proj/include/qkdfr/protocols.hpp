#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "qkdfr/facial_reduction.hpp"

namespace qkdfr::protocols {

struct EbBB84 {
  double p_z = 0.5;
  double q = 0.0;  // quantum bit error rate
};

struct PmBB84 {
  double p_z = 0.5;
  double q = 0.0;
};

struct MdiBB84 {
  double p_z = 0.5;
  double p = 0.0;  // depolarizing probability on each leg
};

struct Tfqkd {
  double q = 0.5;            // vacuum amplitude squared of the source state
  double distance_km = 0.0;  // Alice-Bob distance, Charlie in the middle
  double p_x = 0.5;          // key-basis probability
  double eta_d = 0.145;      // detector efficiency, folded into the arm transmittance
  double p_d = 1e-8;         // dark-count probability per detector
};

using ProtocolParams = std::variant<EbBB84, PmBB84, MdiBB84, Tfqkd>;

struct GeneratedInstance {
  ProblemInstance instance;
  HermitianMatrix simulation_state;  // feasible state the constraint values were computed from
};

GeneratedInstance gen_ebBB84(const EbBB84& p);
GeneratedInstance gen_pmBB84(const PmBB84& p);
GeneratedInstance gen_mdiBB84(const MdiBB84& p);
GeneratedInstance gen_tfqkd(const Tfqkd& p);
GeneratedInstance generate(const ProtocolParams& params);

/// "ebBB84", "pmBB84", "mdiBB84", "TFQKD" (case-insensitive on input).
ProtocolParams parse_params(const std::string& protocol, const std::vector<double>& values);
std::string protocol_name(const ProtocolParams& params);
/// "(0.50,0.05)" style, two decimals as in the result tables.
std::string format_params(const ProtocolParams& params);
/// Throws InstanceError on out-of-range values.
void validate_params(const ProtocolParams& params);

/// Per-arm transmittance of the TF setup.
double tfqkd_arm_transmittance(const Tfqkd& p);

/// Charlie's three-outcome POVM on the two arriving modes, restricted to at most
/// one photon per mode. Basis index 2*n_a + n_b. Outcome 0: only the first detector
/// clicks, 1: only the second, 2: anything else.
std::array<CMatrix, 3> tfqkd_detection_povm(double p_d);

// Small building blocks shared with tests.
CMatrix ket(Index dim, Index i);
CMatrix projector(const CMatrix& ket);
/// Orthonormal basis of Hermitian d x d matrices (hmat of unit vectors).
std::vector<HermitianMatrix> hermitian_basis(Index d);

}  // namespace qkdfr::protocols
