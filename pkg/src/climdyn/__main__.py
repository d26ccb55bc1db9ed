from . import climdyn

if __name__ == "__main__":
    climdyn()
