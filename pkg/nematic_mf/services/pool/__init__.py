"""Worker pool for independent grid scans and Monte Carlo chains."""
