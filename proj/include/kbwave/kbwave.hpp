#ifndef KBWAVE_KBWAVE_HPP
#define KBWAVE_KBWAVE_HPP

#include "kbwave/error.hpp"
#include "kbwave/elliptic.hpp"
#include "kbwave/quartic.hpp"
#include "kbwave/reduction.hpp"
#include "kbwave/oracle.hpp"
#include "kbwave/solutions.hpp"
#include "kbwave/verify.hpp"
#include "kbwave/evolution.hpp"
#include "kbwave/permanence.hpp"
#include "kbwave/higher_ell.hpp"
#include "kbwave/io.hpp"
#include "kbwave/presets.hpp"

#endif
