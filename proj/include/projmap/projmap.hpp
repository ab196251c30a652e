#pragma once

#include "projmap/camera_model.hpp"
#include "projmap/errors.hpp"
#include "projmap/pointcloud_io.hpp"
#include "projmap/renderer.hpp"
#include "projmap/transforms.hpp"
#include "projmap/verifier.hpp"
