// engine_model.hpp: The driven multilevel working medium: levels, hot/cold
// manifolds, bath jump operators, the resonant drive and regime checks.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qhe/liouville.hpp"

namespace qhe {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Drive coupling |lower><upper| + h.c. with amplitude epsilon, assigned to
/// field 1 or field 2 (the two-field engine drives them in separate strokes).
struct DrivePair {
    int lower{};
    int upper{};
    int field{1};

    friend bool operator==(const DrivePair&, const DrivePair&) = default;
};

/// Level indices are 0-based. The default model is the four-level engine with
/// levels (-2, -0.5, 0.5, 2): hot manifold {0, 3}, cold manifold {1, 2}, drive
/// pairs (0,1) and (2,3).
struct EngineModel {
    std::vector<double> levels;
    std::vector<int> hot_manifold;
    std::vector<int> cold_manifold;
    double t_hot{5.0};
    double t_cold{1.0};
    double gamma_hot{5e-4};
    double gamma_cold{5e-4};
    double epsilon{5e-4};
    double omega{1.5};
    std::vector<DrivePair> drive_pairs;

    /// Symmetric four-level layout with gaps de_hot (levels 0,3) and de_cold
    /// (levels 1,2); omega = (de_hot - de_cold) / 2.
    static EngineModel four_level(double de_hot, double de_cold, double t_hot, double t_cold,
                                  double gamma_hot, double gamma_cold, double epsilon);

    /// dE_h = 4, dE_c = 1, T_h = 5, T_c = 1, eps = gamma_h = gamma_c = 5e-4.
    static EngineModel defaults();

    int dim() const { return static_cast<int>(levels.size()); }
    double drive_period() const;  // 2 pi / omega

    /// Throws ModelError on violated invariants.
    void validate() const;

    friend bool operator==(const EngineModel&, const EngineModel&) = default;
};

enum class Bath { hot, cold };

enum class DriveField { both, first, second };

/// Generator channels a schedule segment can switch on.
enum class Channel : std::size_t { cold = 0, hot, drive, drive1, drive2, dephasing };
inline constexpr std::size_t kChannelCount = 6;

std::string to_string(Channel c);

/// The constant building blocks every schedule is assembled from.
struct GeneratorSet {
    Op h0;
    std::array<Superop, kChannelCount> gens;
    std::array<double, kChannelCount> norms{};
    /// When set, the dephasing channel acts as the exact projection onto the
    /// population subspace instead of a finite-rate generator.
    bool complete_dephasing{false};

    const Superop& operator[](Channel c) const { return gens[static_cast<std::size_t>(c)]; }
    double norm(Channel c) const { return norms[static_cast<std::size_t>(c)]; }
    int dim() const { return static_cast<int>(h0.rows()); }

    void set(Channel c, Superop g);
};

Op build_h0(const EngineModel& model);

/// H_w = eps * sum_pairs |l><u| + h.c. restricted to the selected field(s).
Op build_drive_hamiltonian(const EngineModel& model, DriveField field = DriveField::both);

/// Interaction-picture RWA drive term: the superoperator of (1/2) H_w.
Superop build_drive_rwa(const EngineModel& model, DriveField field = DriveField::both);

/// Jump operators of one bath. For every level pair (a, b) in the manifold with
/// E_a < E_b: sqrt(g) exp(-(E_b - E_a) / 2T) |b><a| and sqrt(g) |a><b|.
std::vector<Op> bath_jump_operators(const EngineModel& model, Bath which);

Superop build_bath(const EngineModel& model, Bath which);

/// Diagonal Boltzmann state supported on `support` (0-based indices).
Vec gibbs_state(const std::vector<double>& levels, double temperature,
                const std::vector<int>& support);

/// All generators of the model; the dephasing slot is left at zero.
GeneratorSet build_generators(const EngineModel& model);

struct RegimeWarning {
    std::string check;
    double ratio{};
    std::string message;
};

struct RegimeParams {
    std::optional<double> drive_periods_per_sixth;  // m
};

/// A ratio above this counts as a violated "much less than".
inline constexpr double kRegimeRatioLimit = 0.1;

/// Non-fatal checks: eps << gamma (local Lindblad), eps << omega (RWA),
/// m >> omega / min gap (secular), single resonant frequency.
std::vector<RegimeWarning> validate_regime(const EngineModel& model, const RegimeParams& params);

}  // namespace qhe
