#pragma once

#include <string>

#include "carnot/surface.hpp"

namespace carnot {

// Group by preset name ("h1", "h2", "h3", "engel") or algebra config path.
StratifiedAlgebra make_group(const std::string& spec);

// Norm by kind ("korany" or "power-lambda" with exponent).
HomogeneousNorm make_norm(const StratifiedAlgebra& alg, const std::string& kind, int lambda = 0);

// Named surface presets:
//   h1-vertical-plane     {x1 = 0}, square patch
//   h1-t0-plane           {t = 0}, square patch
//   h1-disk               {t = 0, |x_H| <= radius}
//   h1-cylinder           {|x_H| = radius}, four graph patches, |t| <= 1/2
//   h1-paraboloid         {t = x1^2 + x2^2}
//   h1-capped-cylinder    closed: unit cylinder capped by two Korany-sphere caps
//   engel-vertical-plane  {x1 = 0} in the Engel group, cubic patch
// The radius parameter applies where noted (default 1).
GraphSurface make_surface(const StratifiedAlgebra& alg, const std::string& preset,
                          double radius = 1.0);

// Custom single-patch graph surface from a JSON object:
//   {"alpha": <1-based direction>, "domain": [[lo...],[hi...]] or [box, ...],
//    "height": [[[e...], coeff], ...], "orientation": +-1}
GraphSurface surface_from_json_text(const StratifiedAlgebra& alg, const std::string& text);

bool is_surface_preset(const std::string& name);

}  // namespace carnot
