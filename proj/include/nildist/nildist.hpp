#pragma once

#include "nildist/chains.hpp"
#include "nildist/flag.hpp"
#include "nildist/io.hpp"
#include "nildist/matcore.hpp"
#include "nildist/matrix.hpp"
#include "nildist/nestdist.hpp"
#include "nildist/optimize.hpp"
#include "nildist/rng.hpp"
#include "nildist/verify.hpp"
#include "nildist/version.hpp"
