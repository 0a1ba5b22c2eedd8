# Setup-time scheduling solver package
