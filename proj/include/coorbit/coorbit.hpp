#pragma once

// Umbrella header. JSON encodings live in coorbit/io.hpp and need the
// vendored nlohmann json header on the include path.

#include "coorbit/fft.hpp"
#include "coorbit/group_core.hpp"
#include "coorbit/weights.hpp"
#include "coorbit/signal.hpp"
#include "coorbit/voice.hpp"
#include "coorbit/group_field.hpp"
#include "coorbit/discretization.hpp"
#include "coorbit/frames.hpp"
