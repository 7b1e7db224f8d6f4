#pragma once

#include "align.hpp"
#include "beamform.hpp"
#include "bench.hpp"
#include "blinddetect.hpp"
#include "channel.hpp"
#include "clusterdoa.hpp"
#include "error.hpp"
#include "fix.hpp"
#include "geometry.hpp"
#include "iq_io.hpp"
#include "music.hpp"
#include "scenario.hpp"
#include "signalgen.hpp"
#include "types.hpp"
