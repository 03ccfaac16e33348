// protocols.cpp: Stroke schedules, action and cycle propagators.

#include "qhe/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace qhe {

namespace {

constexpr double kRelTol = 1e-12;

bool close(double a, double b, double scale) {
    return std::abs(a - b) <= kRelTol * std::max(scale, 1e-300);
}

Segment seg(double duration, std::initializer_list<std::pair<Channel, double>> ws) {
    Segment s;
    s.duration = duration;
    for (auto [c, w] : ws) {
        s.weight(c) = w;
    }
    return s;
}

void require_positive(double tau) {
    if (!(tau > 0) || !std::isfinite(tau)) {
        throw ScheduleError("cycle time must be positive and finite");
    }
}

}  // namespace

bool Segment::drive_on() const {
    return weight(Channel::drive) > 0 || weight(Channel::drive1) > 0 ||
           weight(Channel::drive2) > 0;
}

bool Segment::thermal_on() const {
    return weight(Channel::cold) > 0 || weight(Channel::hot) > 0;
}

std::string to_string(EngineType t) {
    switch (t) {
        case EngineType::continuous: return "continuous";
        case EngineType::two_stroke: return "two_stroke";
        case EngineType::four_stroke: return "four_stroke";
        case EngineType::two_field: return "two_field";
    }
    return "unknown";
}

EngineType engine_type_from_string(const std::string& s) {
    for (auto t : all_engine_types()) {
        if (to_string(t) == s) {
            return t;
        }
    }
    throw ScheduleError("unknown engine type '" + s + "'");
}

const std::vector<EngineType>& all_engine_types() {
    static const std::vector<EngineType> types{EngineType::continuous, EngineType::two_stroke,
                                               EngineType::four_stroke, EngineType::two_field};
    return types;
}

double Schedule::total_duration() const {
    double t = 0;
    for (const auto& s : segments) {
        t += s.duration;
    }
    return t;
}

double channel_area(const Schedule& s, Channel c) {
    double a = 0;
    for (const auto& seg : s.segments) {
        a += seg.duration * seg.weight(c);
    }
    return a;
}

double duty_cycle(const Schedule& s) {
    if (s.tau_cyc <= 0) {
        return 0;
    }
    double on = 0;
    for (const auto& seg : s.segments) {
        if (seg.drive_on()) {
            on += seg.duration;
        }
    }
    return on / s.tau_cyc;
}

void validate_schedule(const Schedule& s) {
    const double tau = s.tau_cyc;
    if (!(tau >= 0) || !std::isfinite(tau)) {
        throw ScheduleError("cycle time must be finite and non-negative");
    }
    for (const auto& seg : s.segments) {
        if (!(seg.duration >= 0) || !std::isfinite(seg.duration)) {
            throw ScheduleError("segment durations must be finite and non-negative");
        }
        for (double w : seg.weights) {
            if (!(w >= 0) || !std::isfinite(w)) {
                throw ScheduleError("segment weights must be finite and non-negative");
            }
        }
    }
    if (!close(s.total_duration(), tau, tau)) {
        throw ScheduleError("segment durations do not sum to the cycle time");
    }
    const std::size_t n = s.segments.size();
    for (std::size_t k = 0; k < n / 2; ++k) {
        const auto& a = s.segments[k];
        const auto& b = s.segments[n - 1 - k];
        bool same = close(a.duration, b.duration, tau);
        for (std::size_t c = 0; c < kChannelCount && same; ++c) {
            same = close(a.weights[c], b.weights[c], std::max(a.weights[c], 1.0));
        }
        if (!same) {
            throw ScheduleError("schedule is not symmetric about the cycle midpoint");
        }
    }
    auto area_is = [&](Channel c, double target) {
        return close(channel_area(s, c), target, std::max(tau, 1e-300));
    };
    if (!area_is(Channel::cold, tau) || !area_is(Channel::hot, tau)) {
        throw ScheduleError("bath areas must equal the cycle time");
    }
    const bool single = area_is(Channel::drive, tau) && area_is(Channel::drive1, 0) &&
                        area_is(Channel::drive2, 0);
    const bool split = area_is(Channel::drive, 0) && area_is(Channel::drive1, tau) &&
                       area_is(Channel::drive2, tau);
    if (!single && !split) {
        throw ScheduleError("drive areas must equal the cycle time");
    }
    if (!area_is(Channel::dephasing, 0) && !area_is(Channel::dephasing, tau)) {
        throw ScheduleError("dephasing area must be zero or the cycle time");
    }
}

double cycle_time(const EngineModel& model, double m) {
    return 6 * m * model.drive_period();
}

Schedule continuous_schedule(double tau) {
    require_positive(tau);
    Schedule s;
    s.tau_cyc = tau;
    s.type = EngineType::continuous;
    s.segments = {seg(tau, {{Channel::cold, 1}, {Channel::hot, 1}, {Channel::drive, 1}})};
    return s;
}

Schedule four_stroke_schedule(double tau) {
    require_positive(tau);
    Schedule s;
    s.tau_cyc = tau;
    s.type = EngineType::four_stroke;
    s.segments = {
        seg(tau / 6, {{Channel::cold, 3}}),
        seg(tau / 6, {{Channel::drive, 3}}),
        seg(tau / 3, {{Channel::hot, 3}}),
        seg(tau / 6, {{Channel::drive, 3}}),
        seg(tau / 6, {{Channel::cold, 3}}),
    };
    return s;
}

Schedule two_stroke_schedule(double tau) {
    require_positive(tau);
    Schedule s;
    s.tau_cyc = tau;
    s.type = EngineType::two_stroke;
    s.segments = {
        seg(tau / 3, {{Channel::cold, 1.5}, {Channel::hot, 1.5}}),
        seg(tau / 3, {{Channel::drive, 3}}),
        seg(tau / 3, {{Channel::cold, 1.5}, {Channel::hot, 1.5}}),
    };
    return s;
}

Schedule two_field_four_stroke_schedule(double tau) {
    require_positive(tau);
    Schedule s;
    s.tau_cyc = tau;
    s.type = EngineType::two_field;
    s.segments = {
        seg(tau / 12, {{Channel::drive1, 6}}),
        seg(tau / 3, {{Channel::cold, 1.5}, {Channel::hot, 1.5}}),
        seg(tau / 6, {{Channel::drive2, 6}}),
        seg(tau / 3, {{Channel::cold, 1.5}, {Channel::hot, 1.5}}),
        seg(tau / 12, {{Channel::drive1, 6}}),
    };
    return s;
}

Schedule make_schedule(EngineType type, double tau) {
    switch (type) {
        case EngineType::continuous: return continuous_schedule(tau);
        case EngineType::two_stroke: return two_stroke_schedule(tau);
        case EngineType::four_stroke: return four_stroke_schedule(tau);
        case EngineType::two_field: return two_field_four_stroke_schedule(tau);
    }
    throw ScheduleError("unknown engine type");
}

Schedule with_dephasing(Schedule s) {
    double thermal_time = 0;
    for (const auto& seg : s.segments) {
        if (seg.thermal_on()) {
            thermal_time += seg.duration;
        }
    }
    if (thermal_time <= 0) {
        throw ScheduleError("with_dephasing: schedule has no thermal segment");
    }
    const double w = s.tau_cyc / thermal_time;
    for (auto& seg : s.segments) {
        seg.weight(Channel::dephasing) = seg.thermal_on() ? w : 0.0;
    }
    return s;
}

Schedule refine(const Schedule& s, int parts) {
    if (parts < 1) {
        throw ScheduleError("refine: parts must be positive");
    }
    Schedule out = s;
    out.segments.clear();
    for (const auto& seg : s.segments) {
        Segment piece = seg;
        piece.duration = seg.duration / parts;
        for (int k = 0; k < parts; ++k) {
            out.segments.push_back(piece);
        }
    }
    return out;
}

Schedule merge_segments(const Schedule& s) {
    Schedule out = s;
    out.segments.clear();
    for (const auto& seg : s.segments) {
        if (!out.segments.empty() && out.segments.back().weights == seg.weights) {
            out.segments.back().duration += seg.duration;
        } else {
            out.segments.push_back(seg);
        }
    }
    return out;
}

std::vector<Segment> positive_half(const Schedule& s) {
    const double mid = s.tau_cyc / 2;
    std::vector<Segment> half;
    double t = 0;
    for (const auto& seg : s.segments) {
        const double start = t;
        const double end = t + seg.duration;
        t = end;
        if (end <= mid * (1 + kRelTol)) {
            continue;
        }
        Segment piece = seg;
        if (start < mid) {
            piece.duration = end - mid;
        }
        if (piece.duration > 0) {
            half.push_back(piece);
        }
    }
    return half;
}

Schedule symmetric_rearrange(const Schedule& s, const std::vector<std::size_t>& permutation) {
    validate_schedule(s);
    const auto bins = positive_half(s);
    if (permutation.size() != bins.size()) {
        throw ScheduleError("permutation length " + std::to_string(permutation.size()) +
                            " does not match " + std::to_string(bins.size()) + " bins");
    }
    std::vector<std::size_t> sorted = permutation;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted[k] != k) {
            throw ScheduleError("symmetric_rearrange: not a permutation of the bins");
        }
    }
    std::vector<Segment> pos;
    pos.reserve(bins.size());
    for (std::size_t k : permutation) {
        pos.push_back(bins[k]);
    }
    Schedule out = s;
    out.segments.assign(pos.rbegin(), pos.rend());
    out.segments.insert(out.segments.end(), pos.begin(), pos.end());
    out = merge_segments(out);
    validate_schedule(out);
    return out;
}

double action(const Schedule& s, const GeneratorSet& g) {
    double a = 0;
    for (const auto& seg : s.segments) {
        double rate = 0;
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (seg.weights[c] != 0) {
                rate += seg.weights[c] * g.norms[c];
            }
        }
        a += seg.duration * rate;
    }
    return a;
}

Superop segment_generator(const Segment& seg, const GeneratorSet& g) {
    const Eigen::Index n2 = g.h0.rows() * g.h0.rows();
    Superop gen = Superop::Zero(n2, n2);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (seg.weights[c] != 0) {
            gen += seg.weights[c] * g.gens[c];
        }
    }
    return gen;
}

Superop segment_propagator(const Segment& seg, const GeneratorSet& g) {
    const bool project = g.complete_dephasing && seg.weight(Channel::dephasing) > 0;
    if (!project) {
        return propagate(segment_generator(seg, g), seg.duration);
    }
    const Superop p = population_projector<double>(g.h0.rows());
    Segment coherent = seg;
    coherent.weight(Channel::dephasing) = 0;
    const Superop gen = p * segment_generator(coherent, g) * p;
    return p * propagate(gen, seg.duration) * p;
}

Superop cycle_propagator(const Schedule& s, const GeneratorSet& g) {
    const Eigen::Index n2 = g.h0.rows() * g.h0.rows();
    Superop k = Superop::Identity(n2, n2);
    for (const auto& seg : s.segments) {
        k = segment_propagator(seg, g) * k;
    }
    return k;
}

std::string describe(const Schedule& s) {
    std::ostringstream os;
    os << to_string(s.type) << ':';
    for (std::size_t i = 0; i < s.segments.size(); ++i) {
        const auto& seg = s.segments[i];
        os << (i ? " |" : "") << ' ' << fmt::format("{:.6g}", seg.duration / s.tau_cyc)
           << "*tau[";
        bool first = true;
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (seg.weights[c] != 0) {
                os << (first ? "" : ",") << to_string(static_cast<Channel>(c)) << '='
                   << fmt::format("{:g}", seg.weights[c]);
                first = false;
            }
        }
        os << ']';
    }
    return os.str();
}

}  // namespace qhe
