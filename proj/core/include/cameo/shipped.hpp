#pragma once

#include <string_view>

namespace cameo {

enum class Formulation { A, B };

/// Text of the workflow document shipped for a formulation.
std::string_view shipped_pipeline(Formulation f);

}  // namespace cameo
