# Reporting module
