#include "har/pipeline.hpp"

#include "binary_io.hpp"
#include "har/errors.hpp"

#include <fstream>
#include <sstream>

namespace har
{
namespace
{
const std::string k_bundle_magic = "HARREFS1\n";
}

void write_bundle(std::ostream& out, const TrainedPipeline& p)
{
   p.refs.validate();
   nlohmann::ordered_json h;
   h["format"]  = "har-refs";
   h["version"] = 1;
   h["config"]  = p.config.to_json();
   h["classes"] = p.refs.classes();
   h["layout"]  = p.scaling.layout;
   h["feature_dim"] = p.scaling.min.size();
   h["dim"]     = p.refs.dim();
   h["has_model"] = p.model.has_value();
   auto refs    = nlohmann::ordered_json::array();
   for(const auto& r : p.refs.references()) refs.push_back({{"label", r.label}, {"frames", r.frames.cols()}});
   h["references"] = std::move(refs);

   detail::write_block(out, k_bundle_magic, h.dump());
   detail::write_doubles(out, p.scaling.min.data(), static_cast<std::size_t>(p.scaling.min.size()));
   detail::write_doubles(out, p.scaling.max.data(), static_cast<std::size_t>(p.scaling.max.size()));
   if(p.model) {
      std::ostringstream blob;
      write_model(blob, *p.model);
      const auto bytes = blob.str();
      detail::write_le<std::uint64_t>(out, bytes.size());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
   }
   for(const auto& r : p.refs.references()) detail::write_matrix_rowmajor(out, r.frames);
}

TrainedPipeline read_bundle(std::istream& in)
{
   const auto header = detail::read_block(in, k_bundle_magic);
   TrainedPipeline p;
   nlohmann::json h;
   try {
      h = nlohmann::json::parse(header);
   } catch(const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, std::string("bundle header: ") + e.what());
   }
   try {
      if(h.at("format") != "har-refs" || h.at("version") != 1) fail(ErrorKind::Parse, "unsupported bundle version");
      p.config = PipelineConfig::from_json(h.at("config"));
      const auto feature_dim = h.at("feature_dim").get<Eigen::Index>();
      const auto dim         = h.at("dim").get<Eigen::Index>();
      if(feature_dim <= 0 || feature_dim > (1 << 20) || dim <= 0 || dim > feature_dim)
         fail(ErrorKind::Parse, "implausible bundle dimensions");
      p.scaling.layout = h.at("layout").get<std::string>();
      if(p.scaling.layout != p.config.embedding.layout_version())
         fail(ErrorKind::LayoutMismatch, "bundle layout does not match its embedding configuration");
      p.scaling.min.resize(feature_dim);
      p.scaling.max.resize(feature_dim);
      detail::read_doubles(in, p.scaling.min.data(), static_cast<std::size_t>(feature_dim));
      detail::read_doubles(in, p.scaling.max.data(), static_cast<std::size_t>(feature_dim));
      if(h.at("has_model").get<bool>()) {
         const auto len = detail::read_le<std::uint64_t>(in);
         if(len > (1ull << 34)) fail(ErrorKind::Parse, "model blob length implausible");
         std::string bytes(len, '\0');
         if(!in.read(bytes.data(), static_cast<std::streamsize>(len))) fail(ErrorKind::Parse, "bundle truncated");
         std::istringstream blob(bytes);
         p.model = read_model(blob).model;
         if(p.model->layout != p.scaling.layout || p.model->latent_dim() != dim)
            fail(ErrorKind::LayoutMismatch, "bundled model does not match the references");
      } else if(dim != feature_dim) {
         fail(ErrorKind::Parse, "reference dimension differs from feature dimension without a model");
      }
      p.refs = ReferenceSet(h.at("classes").get<std::vector<std::string>>(), p.config.classifier);
      for(const auto& r : h.at("references")) {
         const auto frames = r.at("frames").get<Eigen::Index>();
         if(frames <= 0 || frames > (1 << 24)) fail(ErrorKind::Parse, "implausible reference length");
         Eigen::MatrixXd m(dim, frames);
         detail::read_matrix_rowmajor(in, m);
         p.refs.add(std::move(m), r.at("label").get<std::string>());
      }
   } catch(const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, std::string("bundle header: ") + e.what());
   }
   p.refs.validate();
   return p;
}

void save_bundle(const std::filesystem::path& path, const TrainedPipeline& pipeline)
{
   std::ofstream out(path, std::ios::binary);
   if(!out) fail(ErrorKind::Io, "cannot write " + path.string());
   write_bundle(out, pipeline);
   if(!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

TrainedPipeline load_bundle(const std::filesystem::path& path)
{
   std::ifstream in(path, std::ios::binary);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   return read_bundle(in);
}

} // namespace har
