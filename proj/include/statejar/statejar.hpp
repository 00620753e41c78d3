// statejar: umbrella header.
#pragma once

#include "statejar/context.hpp"
#include "statejar/cookie.hpp"
#include "statejar/corpus.hpp"
#include "statejar/date.hpp"
#include "statejar/header.hpp"
#include "statejar/host.hpp"
#include "statejar/interop.hpp"
#include "statejar/jar.hpp"
#include "statejar/matching.hpp"
#include "statejar/policy.hpp"
#include "statejar/result.hpp"
#include "statejar/sim.hpp"
