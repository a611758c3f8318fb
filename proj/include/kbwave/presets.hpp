#ifndef KBWAVE_PRESETS_HPP
#define KBWAVE_PRESETS_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kbwave/solutions.hpp"
#include "kbwave/verify.hpp"

namespace kbwave {

struct FigurePreset {
    std::string name;
    std::string formula; // plain-text closed form at t = 0
    std::function<ClosedFormSolution()> build;
    double spot_xi;      // reference point for the spot check
    double spot_value;   // exact u(spot_xi, 0)
};

inline const std::vector<FigurePreset>& figure_presets()
{
    static const std::vector<FigurePreset> presets = [] {
        const double r3 = std::sqrt(3.0), r14 = std::sqrt(14.0);
        std::vector<FigurePreset> v;
        v.push_back({"fig-case1a", "sech(xi) - 2",
                     [] { return case1(Case1Kind::cn, -3.0, -2.0, -1.0); }, 0.0, -1.0});
        v.push_back({"fig-case1b-k05", "dn(xi, 1/2) - 2",
                     [r3] { return case1(Case1Kind::dn, -3.0, -2.0 - r3 / 2.0, -1.0); }, 0.0, -1.0});
        v.push_back({"fig-case2a", "1/(-2 - sqrt(3) sin(xi))",
                     [r3] { return case2_or_throw(Case2Kind::sn, -2.0 - r3, 0.0, -2.0 + r3); }, 0.0, -0.5});
        v.push_back({"fig-case2b", "1/(2 - sqrt(3) cos(xi))",
                     [r3] { return case2_or_throw(Case2Kind::cn, 2.0 - r3, 0.0, 2.0 + r3); }, 0.0, 2.0 + r3});
        v.push_back({"fig-case2bc-k1", "1/(1 - sqrt(7/8) sech(sqrt(7) xi))",
                     [r14] { return case2_or_throw(Case2Kind::dn, 8.0 - 2.0 * r14, 1.0, 8.0 + 2.0 * r14); }, 0.0,
                     1.0 / (1.0 - std::sqrt(7.0 / 8.0))});
        v.push_back({"fig-case2e", "sin(2 xi/sqrt(3))/(sin(2 xi/sqrt(3)) + 2)",
                     [] { return case2_or_throw(Case2Kind::inv_sn, -1.0, 1.0, 1.0 / 3.0); }, 0.0, 0.0});
        v.push_back({"fig-case2f", "cos(2 xi/sqrt(3))/(cos(2 xi/sqrt(3)) + 2)",
                     [] { return case2_or_throw(Case2Kind::inv_cn, -1.0, 1.0, 1.0 / 3.0); }, 0.0, 1.0 / 3.0});
        v.push_back({"fig-case2f-k1", "sech(xi/sqrt(3))/(sech(xi/sqrt(3)) + 2)",
                     [] { return case2_or_throw(Case2Kind::inv_cn, -1.0, 0.0, 1.0 / 3.0); }, 0.0, 1.0 / 3.0});
        return v;
    }();
    return presets;
}

inline const FigurePreset& find_preset(const std::string& name)
{
    for (const auto& p : figure_presets())
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : figure_presets()) known += (known.empty() ? "" : ", ") + p.name;
    throw Error(ErrorKind::invalid_argument, "unknown preset '" + name + "' (known: " + known + ")");
}

} // namespace kbwave

#endif
