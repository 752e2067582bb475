# Delassus algorithms, metering, benchmarks and URDF loading
