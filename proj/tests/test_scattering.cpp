#include <doctest.h>

#include "core/scattering.hpp"
