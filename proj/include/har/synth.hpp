#pragma once

#include "har/skeleton.hpp"
#include "har/skeleton_io.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace har
{
// Parametric gesture generator: six limb-trajectory classes labeled like
// their UTD-MHAD counterparts (a1 swipe left, a6 cross arms, a7 basketball
// shoot, a9 draw circle, a24 sit to stand, a27 forward lunge), with
// per-sequence subject scale, position, body yaw and tempo variation and
// i.i.d. Gaussian landmark noise.
struct SynthConfig
{
   int sequences_per_class = 32;
   double noise_sigma      = 0.02; // m
   int min_frames          = 36;
   int max_frames          = 54;
   double rate_hz          = 30.0;
   std::uint64_t seed      = 7;
};

const std::vector<std::string>& synth_classes();

PoseSequence synth_sequence(const std::string& label, std::mt19937_64& rng, const SynthConfig& cfg);

// Classes in synth_classes() order, sequences_per_class each, with subject
// and trial tags.
std::vector<PoseSequence> generate_dataset(const SynthConfig& cfg);

// Landmarks drawn independently per frame inside a body-sized box.
PoseSequence noise_sequence(std::mt19937_64& rng, int frames, double rate_hz = 30.0);

// Writes one neutral file per sequence plus manifest.csv; returns the manifest.
DatasetManifest write_dataset(const std::filesystem::path& dir, const std::vector<PoseSequence>& sequences);

} // namespace har
