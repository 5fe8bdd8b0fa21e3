#pragma once

#include "sek/entropy.hpp"
#include "sek/errors.hpp"
#include "sek/io.hpp"
#include "sek/linalg.hpp"
#include "sek/measurement.hpp"
#include "sek/qkd.hpp"
#include "sek/random.hpp"
#include "sek/sdp.hpp"
#include "sek/state.hpp"
#include "sek/uncertainty.hpp"
