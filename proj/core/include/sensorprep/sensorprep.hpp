#pragma once

#include "sensorprep/anomaly.hpp"
#include "sensorprep/bayesnet.hpp"
#include "sensorprep/error.hpp"
#include "sensorprep/ingest.hpp"
#include "sensorprep/matrix.hpp"
#include "sensorprep/metrics.hpp"
#include "sensorprep/redundancy.hpp"
#include "sensorprep/serialize.hpp"
#include "sensorprep/spectra.hpp"
#include "sensorprep/synth.hpp"
