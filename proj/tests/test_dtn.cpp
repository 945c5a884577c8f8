#include <doctest.h>

#include "core/dtn.hpp"
