#pragma once

#include "bessel.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "presets.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
