#pragma once

#include "delamfem/bench.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace delamfem {

class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Round-trippable numeric formatting (17 significant digits).
std::string format_full(double v);

std::string curve_csv(const LoadDispCurve& curve);
LoadDispCurve parse_curve_csv(const std::string& text);

std::string profile_csv(const TractionProfile& profile);
TractionProfile parse_profile_csv(const std::string& text);

/// Minimal dependency-free line plots.
std::string curve_svg(const LoadDispCurve& curve, const std::string& title);
std::string profile_svg(const TractionProfile& profile, ProfileField field,
                        const std::string& title);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace delamfem
