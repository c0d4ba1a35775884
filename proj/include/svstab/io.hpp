#pragma once

#include <iosfwd>
#include <string>

#include "svstab/lyapunov.hpp"
#include "svstab/simulate.hpp"
#include "svstab/spectrum.hpp"

namespace svstab {

/// 17-significant-digit text form used in every CSV file.
std::string format_double(double v);

/// Columns: x, H, V, Vx, Vxx, Hx.
void write_steady_csv(std::ostream& os, const SteadyState& s);

/// Columns: t, l2, W.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);

/// Columns: x, h, v.
void write_snapshot_csv(std::ostream& os, const Grid& grid, const StateVector& y);

/// Columns: re, im.
void write_spectrum_csv(std::ostream& os, const SpectrumReport& rep);

/// Stable-field-name JSON for the certification report.
std::string stability_report_json(const StabilityReport& rep);

/// Decay curves on linear (left) and log10 (right) panels, one polyline per
/// labelled trace. Log values are clamped at 1e-16.
struct LabelledTrace {
    std::string label;
    const SimulationTrace* trace = nullptr;
};
void write_decay_svg(std::ostream& os, const std::vector<LabelledTrace>& traces);

}  // namespace svstab
