/* checkpoint.cpp */

#include "imagimap/checkpoint.hpp"

#include <cstring>
#include <iomanip>
#include <sstream>

#include "imagimap/errors.hpp"
#include "imagimap/grid_io.hpp"

namespace imagimap {

namespace {

void PutMagic(std::vector<std::uint8_t>& out, const char* magic)
{
    out.insert(out.end(), magic, magic + 4);
}

void ExpectMagic(const std::vector<std::uint8_t>& in, const char* magic, std::size_t& pos)
{
    if (in.size() < 4 || std::memcmp(in.data(), magic, 4) != 0)
        throw FormatError(std::string("bad magic, expected ") + magic);
    pos = 4;
}

std::uint32_t GetChecked(const std::vector<std::uint8_t>& in, std::size_t& pos)
{
    if (pos + 4 > in.size())
        throw FormatError("truncated file");
    return le::GetU32(in, pos);
}

void PutShape(std::vector<std::uint8_t>& out, const ParamTensor& p)
{
    for (const auto d : p.mShape)
        le::PutU32(out, d);
}

ParamTensor GetShape(const std::vector<std::uint8_t>& in, std::size_t& pos,
                     std::size_t bytesPerValue)
{
    ParamTensor p;
    std::uint64_t count = 1;
    for (auto& d : p.mShape) {
        d = GetChecked(in, pos);
        count *= d;
    }
    if (count == 0 || count > (in.size() - pos) / bytesPerValue)
        throw FormatError("layer payload truncated or empty");
    p.mValues.resize(static_cast<std::size_t>(count));
    return p;
}

} // namespace

std::vector<std::uint8_t> EncodeUnit(const ImaginationUnit& unit)
{
    std::vector<std::uint8_t> out;
    PutMagic(out, "IMUN");
    le::PutU32(out, kCheckpointVersion);
    le::PutU32(out, static_cast<std::uint32_t>(unit.ClassId()));
    le::PutU32(out, static_cast<std::uint32_t>(unit.Parameters().size()));
    for (const auto& p : unit.Parameters()) {
        PutShape(out, p);
        for (const double v : p.mValues)
            le::PutF32(out, static_cast<float>(v));
    }
    return out;
}

ImaginationUnit DecodeUnit(const std::vector<std::uint8_t>& bytes)
{
    std::size_t pos = 0;
    ExpectMagic(bytes, "IMUN", pos);
    if (GetChecked(bytes, pos) != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version");
    const auto classId = static_cast<int>(GetChecked(bytes, pos));
    const auto layers = GetChecked(bytes, pos);
    if (layers != static_cast<std::uint32_t>(ImaginationUnit::kNumLayers))
        throw FormatError("unexpected layer count in checkpoint");

    std::vector<ParamTensor> params;
    for (std::uint32_t l = 0; l < layers; ++l) {
        ParamTensor p = GetShape(bytes, pos, 4);
        for (auto& v : p.mValues)
            v = static_cast<double>(le::GetF32(bytes, pos));
        params.push_back(std::move(p));
    }
    if (pos != bytes.size())
        throw FormatError("trailing bytes in checkpoint");
    return ImaginationUnit::FromParameters(classId, std::move(params));
}

void SaveUnit(const std::filesystem::path& path, const ImaginationUnit& unit)
{
    WriteFileBytes(path, EncodeUnit(unit));
}

ImaginationUnit LoadUnit(const std::filesystem::path& path)
{
    return DecodeUnit(ReadFileBytes(path));
}

std::vector<std::uint8_t> EncodeTrainingState(const TrainingState& state)
{
    const auto& params = state.mUnit.Parameters();
    std::vector<std::uint8_t> out;
    PutMagic(out, "IMST");
    le::PutU32(out, kCheckpointVersion);
    le::PutU32(out, static_cast<std::uint32_t>(state.mUnit.ClassId()));
    le::PutU32(out, static_cast<std::uint32_t>(state.mStep & 0xffffffffULL));
    le::PutU32(out, static_cast<std::uint32_t>(state.mStep >> 32));
    le::PutU32(out, static_cast<std::uint32_t>(params.size()));
    for (std::size_t l = 0; l < params.size(); ++l) {
        PutShape(out, params[l]);
        for (const double v : params[l].mValues)
            le::PutF64(out, v);
        for (const double v : state.mAdam.mFirst[l])
            le::PutF64(out, v);
        for (const double v : state.mAdam.mSecond[l])
            le::PutF64(out, v);
    }
    return out;
}

TrainingState DecodeTrainingState(const std::vector<std::uint8_t>& bytes)
{
    std::size_t pos = 0;
    ExpectMagic(bytes, "IMST", pos);
    if (GetChecked(bytes, pos) != kCheckpointVersion)
        throw FormatError("unsupported training state version");
    const auto classId = static_cast<int>(GetChecked(bytes, pos));
    const std::uint64_t lo = GetChecked(bytes, pos);
    const std::uint64_t hi = GetChecked(bytes, pos);
    const auto layers = GetChecked(bytes, pos);
    if (layers != static_cast<std::uint32_t>(ImaginationUnit::kNumLayers))
        throw FormatError("unexpected layer count in training state");

    std::vector<ParamTensor> params;
    AdamState adam;
    for (std::uint32_t l = 0; l < layers; ++l) {
        ParamTensor p = GetShape(bytes, pos, 24);
        std::vector<double> first(p.Size()), second(p.Size());
        for (auto& v : p.mValues)
            v = le::GetF64(bytes, pos);
        for (auto& v : first)
            v = le::GetF64(bytes, pos);
        for (auto& v : second)
            v = le::GetF64(bytes, pos);
        params.push_back(std::move(p));
        adam.mFirst.push_back(std::move(first));
        adam.mSecond.push_back(std::move(second));
    }
    if (pos != bytes.size())
        throw FormatError("trailing bytes in training state");

    TrainingState state;
    state.mUnit = ImaginationUnit::FromParameters(classId, std::move(params));
    state.mAdam = std::move(adam);
    state.mStep = lo | (hi << 32);
    return state;
}

void SaveTrainingState(const std::filesystem::path& path, const TrainingState& state)
{
    WriteFileBytes(path, EncodeTrainingState(state));
}

TrainingState LoadTrainingState(const std::filesystem::path& path)
{
    return DecodeTrainingState(ReadFileBytes(path));
}

std::string LossCurveCsv(const std::vector<LossRecord>& curve)
{
    std::ostringstream os;
    os << "step,loss,w_alpha_mean,w_gamma_mean\n";
    os << std::setprecision(17);
    for (const auto& r : curve)
        os << r.mStep << ',' << r.mLoss << ',' << r.mAlphaMean << ',' << r.mGammaMean << '\n';
    return os.str();
}

} // namespace imagimap
