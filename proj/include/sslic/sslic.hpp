// Umbrella header.
#pragma once

#include "sslic/bench.hpp"
#include "sslic/color.hpp"
#include "sslic/connectivity.hpp"
#include "sslic/image.hpp"
#include "sslic/io.hpp"
#include "sslic/parallel.hpp"
#include "sslic/slic.hpp"
