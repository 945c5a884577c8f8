#include <doctest.h>

#include "core/harness.hpp"
