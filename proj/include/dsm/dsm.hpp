#pragma once

#include "dsm/audit.hpp"
#include "dsm/generator.hpp"
#include "dsm/io.hpp"
#include "dsm/market.hpp"
#include "dsm/money.hpp"
#include "dsm/parallel.hpp"
#include "dsm/prm.hpp"
#include "dsm/rng.hpp"
#include "dsm/tpm.hpp"
#include "dsm/vcg.hpp"
