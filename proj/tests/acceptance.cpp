int acceptance_placeholder_main_x;
int main(){return 0;}
