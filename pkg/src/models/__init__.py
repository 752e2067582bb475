# Kinematic trees, spatial algebra and mechanism generators
