#include <doctest.h>

#include "core/cauchy.hpp"
