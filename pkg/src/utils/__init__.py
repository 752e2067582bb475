# Errors and logging
