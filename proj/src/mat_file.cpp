#include "har/mat_file.hpp"

#include "har/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace har
{
namespace
{
enum MatType : std::uint32_t
{
   miINT8       = 1,
   miUINT8      = 2,
   miINT16      = 3,
   miUINT16     = 4,
   miINT32      = 5,
   miUINT32     = 6,
   miSINGLE     = 7,
   miDOUBLE     = 9,
   miINT64      = 12,
   miUINT64     = 13,
   miMATRIX     = 14,
   miCOMPRESSED = 15,
};

// mxCLASS ids 6..15 are the numeric classes.
constexpr std::uint8_t k_first_numeric_class = 6;
constexpr std::uint8_t k_last_numeric_class  = 15;
constexpr std::uint32_t k_complex_flag       = 0x0800;

class Reader
{
 public:
   Reader(std::span<const unsigned char> bytes, bool swap)
       : bytes_(bytes)
       , swap_(swap)
   {}

   bool at_end() const noexcept { return pos_ >= bytes_.size(); }
   std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

   std::uint32_t u32()
   {
      need(4);
      std::uint32_t v;
      std::memcpy(&v, bytes_.data() + pos_, 4);
      pos_ += 4;
      return swap_ ? __builtin_bswap32(v) : v;
   }

   std::span<const unsigned char> take(std::size_t n)
   {
      need(n);
      auto out = bytes_.subspan(pos_, n);
      pos_ += n;
      return out;
   }

   void skip(std::size_t n)
   {
      need(n);
      pos_ += n;
   }

   void align8()
   {
      const std::size_t pad = (8 - pos_ % 8) % 8;
      pos_                  = std::min(bytes_.size(), pos_ + pad);
   }

   bool swap() const noexcept { return swap_; }

 private:
   void need(std::size_t n) const
   {
      if(n > remaining()) fail(ErrorKind::Parse, "MAT-file truncated");
   }

   std::span<const unsigned char> bytes_;
   std::size_t pos_ = 0;
   bool swap_       = false;
};

struct Element
{
   std::uint32_t type = 0;
   std::span<const unsigned char> data;
};

Element read_element(Reader& r)
{
   const std::uint32_t first = r.u32();
   Element e;
   if((first >> 16) != 0) {
      // small data element: 4 payload bytes inside the 8-byte tag
      e.type                  = first & 0xffff;
      const std::uint32_t len = first >> 16;
      if(len > 4) fail(ErrorKind::Parse, "MAT-file small element too long");
      e.data = r.take(4).first(len);
      return e;
   }
   e.type                    = first;
   const std::uint32_t bytes = r.u32();
   e.data                    = r.take(bytes);
   if(e.type != miCOMPRESSED) r.align8();
   return e;
}

template<typename T> T load_scalar(const unsigned char* p, bool swap)
{
   T v;
   std::memcpy(&v, p, sizeof(T));
   if(swap && sizeof(T) > 1) {
      auto* b = reinterpret_cast<unsigned char*>(&v);
      std::reverse(b, b + sizeof(T));
   }
   return v;
}

std::vector<double> to_doubles(const Element& e, bool swap)
{
   auto convert = [&]<typename T>(T) {
      if(e.data.size() % sizeof(T) != 0) fail(ErrorKind::Parse, "MAT-file numeric size mismatch");
      std::vector<double> out(e.data.size() / sizeof(T));
      for(std::size_t i = 0; i < out.size(); ++i)
         out[i] = static_cast<double>(load_scalar<T>(e.data.data() + i * sizeof(T), swap));
      return out;
   };
   switch(e.type) {
   case miINT8: return convert(std::int8_t{});
   case miUINT8: return convert(std::uint8_t{});
   case miINT16: return convert(std::int16_t{});
   case miUINT16: return convert(std::uint16_t{});
   case miINT32: return convert(std::int32_t{});
   case miUINT32: return convert(std::uint32_t{});
   case miSINGLE: return convert(float{});
   case miDOUBLE: return convert(double{});
   case miINT64: return convert(std::int64_t{});
   case miUINT64: return convert(std::uint64_t{});
   default: fail(ErrorKind::Parse, "MAT-file unsupported numeric type " + std::to_string(e.type));
   }
}

std::vector<unsigned char> inflate_bytes(std::span<const unsigned char> in)
{
   z_stream zs{};
   if(inflateInit(&zs) != Z_OK) fail(ErrorKind::Parse, "zlib init failed");
   std::vector<unsigned char> out;
   std::vector<unsigned char> chunk(1 << 16);
   zs.next_in  = const_cast<Bytef*>(in.data());
   zs.avail_in = static_cast<uInt>(in.size());
   int rc      = Z_OK;
   while(rc != Z_STREAM_END) {
      zs.next_out  = chunk.data();
      zs.avail_out = static_cast<uInt>(chunk.size());
      rc           = inflate(&zs, Z_NO_FLUSH);
      if(rc != Z_OK && rc != Z_STREAM_END) {
         inflateEnd(&zs);
         fail(ErrorKind::Parse, "MAT-file compressed element is corrupt");
      }
      out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
      if(rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
         inflateEnd(&zs);
         fail(ErrorKind::Parse, "MAT-file compressed element truncated");
      }
   }
   inflateEnd(&zs);
   return out;
}

void parse_matrix(std::span<const unsigned char> body, bool swap, std::vector<MatArray>& out)
{
   if(body.empty()) return; // empty placeholder matrix
   Reader r(body, swap);
   const Element flags = read_element(r);
   if(flags.data.size() < 8) fail(ErrorKind::Parse, "MAT-file array flags missing");
   const auto flag_word = load_scalar<std::uint32_t>(flags.data.data(), swap);
   const auto mx_class  = static_cast<std::uint8_t>(flag_word & 0xff);
   if(mx_class < k_first_numeric_class || mx_class > k_last_numeric_class) return;
   if(flag_word & k_complex_flag) return;

   const Element dims_el = read_element(r);
   MatArray arr;
   for(double d : to_doubles(dims_el, swap)) {
      if(d < 0) fail(ErrorKind::Parse, "MAT-file negative dimension");
      arr.dims.push_back(static_cast<std::size_t>(d));
   }
   const Element name_el = read_element(r);
   arr.name.assign(name_el.data.begin(), name_el.data.end());
   const Element real = read_element(r);
   arr.data           = to_doubles(real, swap);

   std::size_t expected = arr.dims.empty() ? 0 : 1;
   for(auto d : arr.dims) expected *= d;
   if(expected != arr.data.size()) fail(ErrorKind::Parse, "MAT-file array '" + arr.name + "' size mismatch");
   out.push_back(std::move(arr));
}

void parse_elements(Reader& r, std::vector<MatArray>& out)
{
   while(r.remaining() >= 8) {
      const Element e = read_element(r);
      if(e.type == miCOMPRESSED) {
         const auto inflated = inflate_bytes(e.data);
         Reader inner(inflated, r.swap());
         parse_elements(inner, out);
      } else if(e.type == miMATRIX) {
         parse_matrix(e.data, r.swap(), out);
      }
   }
}

} // namespace

std::vector<MatArray> parse_mat_bytes(std::span<const unsigned char> bytes)
{
   constexpr std::size_t k_header = 128;
   if(bytes.size() < k_header) fail(ErrorKind::Parse, "MAT-file header truncated");
   const char e0 = static_cast<char>(bytes[126]);
   const char e1 = static_cast<char>(bytes[127]);
   bool swap     = false;
   if(e0 == 'I' && e1 == 'M') swap = false;
   else if(e0 == 'M' && e1 == 'I') swap = true;
   else fail(ErrorKind::Parse, "not a level-5 MAT-file");
   if constexpr(std::endian::native == std::endian::big) swap = !swap;

   Reader r(bytes.subspan(k_header), swap);
   std::vector<MatArray> out;
   parse_elements(r, out);
   return out;
}

std::vector<MatArray> read_mat_file(const std::filesystem::path& path)
{
   std::ifstream in(path, std::ios::binary);
   if(!in) fail(ErrorKind::Io, "cannot open " + path.string());
   std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
   return parse_mat_bytes(bytes);
}

} // namespace har
