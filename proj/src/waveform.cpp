#include "memstdp/waveform.hpp"

#include <algorithm>
#include <string>

namespace memstdp::waveform {

namespace {

std::string seg_text(const Segment& s) {
    return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ") ns";
}

// Sort, check, drop no-ops, merge equal-voltage neighbors.
std::vector<Segment> canonicalize(std::vector<Segment> pieces) {
    std::vector<Segment> kept;
    kept.reserve(pieces.size());
    for (const Segment& s : pieces) {
        if (!std::isfinite(s.volts))
            throw ValidationError("signal segment voltage must be finite");
        if (s.start < 0)
            throw ValidationError("signal segment starts before t=0: " + seg_text(s));
        if (s.end < s.start)
            throw ValidationError("signal segment ends before it starts: " + seg_text(s));
        if (s.start == s.end || s.volts == 0.0)
            continue; // zero-width and zero-voltage stretches are no-ops
        kept.push_back(s);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });
    std::vector<Segment> out;
    out.reserve(kept.size());
    for (const Segment& s : kept) {
        if (!out.empty() && s.start < out.back().end)
            throw ValidationError("signal segments overlap at " + seg_text(s));
        if (!out.empty() && s.start == out.back().end && s.volts == out.back().volts)
            out.back().end = s.end; // merge equal-voltage neighbors
        else
            out.push_back(s);
    }
    return out;
}

} // namespace

Signal::Signal(std::vector<Segment> pieces) : segs_(canonicalize(std::move(pieces))) {}

void PulseShapeParams::validate() const {
    if (!(pre_width > 0))
        throw ValidationError("pulse_params.pre_width must be > 0");
    if (!(post_pulse_width > 0))
        throw ValidationError("pulse_params.post_pulse_width must be > 0");
    if (post_pulse_count < 1)
        throw ValidationError("pulse_params.post_pulse_count must be >= 1");
    if (post_separation < post_pulse_width)
        throw ValidationError("pulse_params.post_separation must be >= post_pulse_width");
    if (post_delay < 0)
        throw ValidationError("pulse_params.post_delay must be >= 0");
    if (!std::isfinite(pre_amplitude) || !std::isfinite(post_amplitude))
        throw ValidationError("pulse_params amplitudes must be finite");
}

Signal make_pre(ns_t onset, const PulseShapeParams& p) {
    p.validate();
    if (onset < 0)
        throw ValidationError("pre pulse onset must be >= 0");
    return Signal({{onset, onset + p.pre_width, p.pre_amplitude}});
}

Signal make_post(ns_t onset, const PulseShapeParams& p) {
    p.validate();
    if (onset < 0)
        throw ValidationError("post train onset must be >= 0");
    std::vector<Segment> pieces;
    pieces.reserve(static_cast<std::size_t>(p.post_pulse_count));
    for (int k = 0; k < p.post_pulse_count; ++k) {
        const ns_t start = onset + p.post_delay + static_cast<ns_t>(k) * p.post_separation;
        pieces.push_back({start, start + p.post_pulse_width, p.post_amplitude});
    }
    return Signal(std::move(pieces));
}

Signal subtract(const Signal& a, const Signal& b) {
    // Sweep over every boundary of either signal; between consecutive
    // boundaries both signals are constant, so a - b is one piece.
    std::vector<ns_t> bounds;
    bounds.reserve(2 * (a.size() + b.size()));
    for (const Segment& s : a.segments()) {
        bounds.push_back(s.start);
        bounds.push_back(s.end);
    }
    for (const Segment& s : b.segments()) {
        bounds.push_back(s.start);
        bounds.push_back(s.end);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<Segment> pieces;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const ns_t lo = bounds[i];
        const ns_t hi = bounds[i + 1];
        pieces.push_back({lo, hi, sample(a, lo) - sample(b, lo)});
    }
    return Signal(std::move(pieces));
}

std::vector<Segment> segments_at_least(const Signal& s, double threshold) {
    if (!(threshold > 0.0))
        throw ValidationError("segments_at_least threshold must be > 0");
    std::vector<Segment> out;
    for (const Segment& seg : s.segments()) {
        if (seg.volts < threshold)
            continue;
        if (!out.empty() && out.back().end == seg.start) {
            // contiguous qualifying region spanning voltage levels: report its
            // guaranteed (minimum) level
            out.back().end = seg.end;
            out.back().volts = std::min(out.back().volts, seg.volts);
        } else {
            out.push_back(seg);
        }
    }
    return out;
}

int coincidence_count(ns_t dt, const PulseShapeParams& p) {
    p.validate();
    if (dt < 0)
        throw ValidationError("coincidence_count dt must be >= 0");
    // Pre pulse [dt, dt + pre_width]; post pulse k at
    // [delay + k*sep, delay + k*sep + width]. Full containment of pulse k:
    //   delay + k*sep + width - pre_width <= dt <= delay + k*sep
    // (with defaults: k*750us + 30us <= dt <= 1500us + k*750us).
    int count = 0;
    for (int k = 0; k < p.post_pulse_count; ++k) {
        const ns_t pulse_start = p.post_delay + static_cast<ns_t>(k) * p.post_separation;
        if (dt >= pulse_start + p.post_pulse_width - p.pre_width && dt <= pulse_start)
            ++count;
    }
    return count;
}

double sample(const Signal& s, ns_t t) {
    if (t < 0)
        throw ValidationError("sample time must be >= 0");
    const auto& segs = s.segments();
    // first segment with end > t; membership is half-open [start, end)
    auto it = std::upper_bound(segs.begin(), segs.end(), t,
                               [](ns_t v, const Segment& seg) { return v < seg.end; });
    if (it != segs.end() && it->start <= t)
        return it->volts;
    return 0.0;
}

} // namespace memstdp::waveform
