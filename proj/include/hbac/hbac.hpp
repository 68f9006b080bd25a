#pragma once
// Heat-bath algorithmic cooling: everything in one include.

#include "hbac/analysis.hpp"
#include "hbac/builders.hpp"
#include "hbac/engine.hpp"
#include "hbac/errors.hpp"
#include "hbac/io.hpp"
#include "hbac/oracle.hpp"
#include "hbac/program.hpp"
#include "hbac/sequences.hpp"
#include "hbac/spin_core.hpp"
