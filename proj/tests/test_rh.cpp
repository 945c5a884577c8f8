#include <doctest.h>

#include "core/rh.hpp"
