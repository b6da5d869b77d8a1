#ifndef LGR_LGR_HPP
#define LGR_LGR_HPP

#include <lgr/assembly.hpp>
#include <lgr/bregman.hpp>
#include <lgr/electrodes.hpp>
#include <lgr/error.hpp>
#include <lgr/field_io.hpp>
#include <lgr/forward.hpp>
#include <lgr/grid.hpp>
#include <lgr/harmonic_lift.hpp>
#include <lgr/pcg.hpp>
#include <lgr/phantom.hpp>
#include <lgr/recon.hpp>
#include <lgr/sparse.hpp>

#endif
