#ifndef GRAND_GRAND_HPP
#define GRAND_GRAND_HPP

#include "grand/bit_block.hpp"
#include "grand/channel.hpp"
#include "grand/codes.hpp"
#include "grand/decoder.hpp"
#include "grand/harness.hpp"
#include "grand/patterns.hpp"
#include "grand/rng.hpp"
#include "grand/softout.hpp"

#endif  // GRAND_GRAND_HPP
