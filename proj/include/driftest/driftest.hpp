#pragma once

#include "driftest/adaptive.hpp"
#include "driftest/dist.hpp"
#include "driftest/driftgen.hpp"
#include "driftest/harness.hpp"
#include "driftest/io.hpp"
#include "driftest/windows.hpp"
