#pragma once

// Everything except the command-line front end (mcreg/cli.hpp).

#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/lasso.hpp>
#include <mcreg/parallel.hpp>
#include <mcreg/dataset.hpp>
#include <mcreg/response_system.hpp>
#include <mcreg/mcr.hpp>
#include <mcreg/tuning.hpp>
#include <mcreg/baselines.hpp>
#include <mcreg/simgen.hpp>
#include <mcreg/metrics.hpp>
#include <mcreg/certify.hpp>
#include <mcreg/bench.hpp>
#include <mcreg/io.hpp>
