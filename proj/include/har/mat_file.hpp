#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace har
{
// Numeric array from a MATLAB level-5 MAT-file, converted to double.
// `data` is column-major, as stored.
struct MatArray
{
   std::string name;
   std::vector<std::size_t> dims;
   std::vector<double> data;
};

// Reads every real numeric matrix in the file, inflating compressed
// elements. Non-numeric classes (cell, struct, char) are skipped.
// Throws ParseError on malformed input, Io when the file can't be opened.
std::vector<MatArray> read_mat_file(const std::filesystem::path& path);
std::vector<MatArray> parse_mat_bytes(std::span<const unsigned char> bytes);

} // namespace har
