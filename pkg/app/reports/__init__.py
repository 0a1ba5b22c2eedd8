# Batch reports and CSV output
