// protocols.hpp: Engine protocols as time-symmetric sequences of
// constant-generator segments, and the propagators they induce.

#pragma once

#include <string>
#include <vector>

#include "qhe/engine_model.hpp"

namespace qhe {

class ScheduleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Weights = std::array<double, kChannelCount>;

/// Dimensionless multipliers of the base generators, held for `duration`.
/// A drive weight of 3 means (3/2) H_w since the base drive term is (1/2) H_w.
struct Segment {
    double duration{};
    Weights weights{};

    double weight(Channel c) const { return weights[static_cast<std::size_t>(c)]; }
    double& weight(Channel c) { return weights[static_cast<std::size_t>(c)]; }
    bool drive_on() const;
    bool thermal_on() const;

    friend bool operator==(const Segment&, const Segment&) = default;
};

enum class EngineType { continuous, two_stroke, four_stroke, two_field };

std::string to_string(EngineType t);
EngineType engine_type_from_string(const std::string& s);
const std::vector<EngineType>& all_engine_types();

/// Segments run from -tau/2 to +tau/2; t = 0 is the cycle midpoint.
struct Schedule {
    std::vector<Segment> segments;
    double tau_cyc{};
    EngineType type{EngineType::continuous};

    double total_duration() const;
};

/// Weight-time area of one channel over the cycle.
double channel_area(const Schedule& s, Channel c);

/// Fraction of the cycle with any drive channel on.
double duty_cycle(const Schedule& s);

/// Throws ScheduleError unless durations sum to tau, the segment list is its
/// own reversal, and every active channel has area tau (relative tol 1e-12).
void validate_schedule(const Schedule& s);

/// tau = 6 m tau_d for integer m is the nominal choice; any tau > 0 is accepted.
double cycle_time(const EngineModel& model, double m);

Schedule continuous_schedule(double tau_cyc);
Schedule four_stroke_schedule(double tau_cyc);
Schedule two_stroke_schedule(double tau_cyc);
/// w1/2 | thermal/3 | w2/6 | thermal/3 | w1/12 with w1, w2 the two drive halves.
Schedule two_field_four_stroke_schedule(double tau_cyc);
Schedule make_schedule(EngineType type, double tau_cyc);

/// Adds a dephasing channel running alongside the baths, spread uniformly over
/// the thermal segments so its area is tau.
Schedule with_dephasing(Schedule s);

/// Splits every segment into `parts` equal sub-segments.
Schedule refine(const Schedule& s, int parts);

/// Merges neighbouring segments with identical weights.
Schedule merge_segments(const Schedule& s);

/// Segments of the positive half [0, tau/2], the central one cut in two.
std::vector<Segment> positive_half(const Schedule& s);

/// Permutes the positive-half bins, mirrors them onto the negative half and
/// merges equal neighbours. `permutation[k]` is the source bin placed k-th.
Schedule symmetric_rearrange(const Schedule& s, const std::vector<std::size_t>& permutation);

/// Sum over segments of duration * sum_c w_c ||G_c||.
double action(const Schedule& s, const GeneratorSet& g);

/// Generator of one segment, sum_c w_c G_c.
Superop segment_generator(const Segment& seg, const GeneratorSet& g);

/// Propagator of one segment. With complete dephasing on, segments carrying a
/// dephasing weight are sandwiched between population projections.
Superop segment_propagator(const Segment& seg, const GeneratorSet& g);

/// Ordered product, first segment applied first.
Superop cycle_propagator(const Schedule& s, const GeneratorSet& g);

/// Human-readable segment list recorded in output metadata.
std::string describe(const Schedule& s);

}  // namespace qhe
