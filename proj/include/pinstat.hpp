#pragma once

#include "pinstat/eeg.hpp"
#include "pinstat/error.hpp"
#include "pinstat/estimate.hpp"
#include "pinstat/infer.hpp"
#include "pinstat/parallel.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/resultant.hpp"
#include "pinstat/rng.hpp"
#include "pinstat/special.hpp"
#include "pinstat/von_mises.hpp"
