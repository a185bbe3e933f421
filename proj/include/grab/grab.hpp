#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"
#include "grab/spectral.hpp"
#include "grab/bandwidth.hpp"
#include "grab/sketch.hpp"
#include "grab/synthetic.hpp"
#include "grab/metrics.hpp"
#include "grab/oracle.hpp"
#include "grab/io.hpp"
#include "grab/experiment.hpp"
