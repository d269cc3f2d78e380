#pragma once

// nlohmann/json comes either from the installed package or from the vendored
// single header, depending on how the core library was configured.
#ifdef PERTURBEX_VENDORED_JSON
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif
