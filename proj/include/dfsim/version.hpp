#pragma once

#define DFSIM_VERSION "0.1.0"
