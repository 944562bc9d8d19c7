#pragma once

#include "ipa/process_ir.hpp"
#include "ipa/realisation_lang.hpp"
#include "ipa/env_model.hpp"
#include "ipa/program_metrics.hpp"
#include "ipa/text_metrics.hpp"
#include "ipa/bench/image_io.hpp"
#include "ipa/bench/manifest.hpp"
#include "ipa/bench/fixtures.hpp"
#include "ipa/bench/evaluate.hpp"
